import math

import pytest

from liverseg import experiment as ex
from liverseg.errors import FoldCountMismatch, TooFewRecords
from liverseg.metrics import MetricReport
from liverseg.schedulers import (
    EarlyStopConfig,
    OneCycleConfig,
    simulate_schedule,
)


def report(dice=98.0, iou=96.0, rvd=-0.008, asd=0.5, rmsd=2.0, hd=30.0, hd95=2.5):
    return MetricReport("", dice, iou, rvd, asd, rmsd, hd, hd95)


class TestKfold:
    def test_ten_ids_five_folds(self):
        ids = [f"{i:03d}" for i in range(10)]
        folds = ex.kfold_split(ids, k=5, seed=42)
        assert len(folds) == 5
        for fold in folds:
            assert len(fold.val_ids) == 2
            assert len(fold.train_ids) == 8
            assert set(fold.val_ids) | set(fold.train_ids) == set(ids)
            assert set(fold.val_ids) & set(fold.train_ids) == set()
        all_val = [i for fold in folds for i in fold.val_ids]
        assert sorted(all_val) == sorted(ids)

    def test_deterministic_given_seed(self):
        ids = [f"{i:03d}" for i in range(23)]
        a = ex.kfold_split(ids, k=5, seed=7)
        b = ex.kfold_split(ids, k=5, seed=7)
        assert a == b
        c = ex.kfold_split(ids, k=5, seed=8)
        assert a != c

    def test_uneven_split_sizes_differ_by_at_most_one(self):
        folds = ex.kfold_split([str(i) for i in range(23)], k=5, seed=0)
        sizes = [len(f.val_ids) for f in folds]
        assert max(sizes) - min(sizes) <= 1
        assert sum(sizes) == 23

    def test_train_corpus_minus_test_gives_56_per_fold(self):
        # a 303-record universe containing the 23 held-out test records
        test = ex.test_record_ids()
        universe = test + [f"{500 + i}" for i in range(280)]
        assert len(universe) == 303
        remaining = [i for i in universe if i not in set(test)]
        folds = ex.kfold_split(remaining, k=5, seed=1)
        assert all(len(f.val_ids) == 56 for f in folds)
        assert all(len(f.train_ids) == 224 for f in folds)

    def test_too_few_records(self):
        with pytest.raises(TooFewRecords):
            ex.kfold_split(["a", "b", "c"], k=5, seed=0)

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError):
            ex.kfold_split(["a", "a", "b", "c", "d"], k=2, seed=0)


class TestTestRecords:
    def test_exact_published_list(self):
        ids = ex.test_record_ids()
        assert len(ids) == 23
        assert ids[0] == "003"
        assert ids[-1] == "320"
        assert "294" in ids
        assert ids == sorted(ids)
        assert all(len(i) == 3 for i in ids)

    def test_fresh_copy_each_call(self):
        a = ex.test_record_ids()
        a.append("999")
        assert len(ex.test_record_ids()) == 23


class TestAggregate:
    def test_identical_folds_zero_std(self):
        reports = [report() for _ in range(5)]
        row = ex.aggregate(reports, epochs=[30] * 5)
        assert row["dice"] == "98.00 (0.00)"
        assert row["epochs"] == "30.0 (0.0)"

    def test_table_one_dice_formatting(self):
        values = [98.1, 98.1, 98.1, 98.1, 98.2]
        reports = [report(dice=v) for v in values]
        row = ex.aggregate(reports, epochs=[22] * 5)
        assert row["dice"] == "98.12 (0.04)"

    def test_epoch_formatting(self):
        reports = [report() for _ in range(5)]
        row = ex.aggregate(reports, epochs=[22, 21, 24, 23, 20])
        assert row["epochs"] == "22.0 (1.6)"

    def test_rvd_three_decimals(self):
        reports = [report(rvd=v) for v in (-0.008, -0.009, -0.007, -0.008, -0.008)]
        row = ex.aggregate(reports, epochs=[1] * 5)
        assert row["rvd"] == "-0.008 (0.001)"

    def test_sample_std_is_used(self):
        # population std of {22,21,24,23,20} is 1.41; sample std is 1.58
        _, std = ex._mean_std([22, 21, 24, 23, 20])
        assert std == pytest.approx(math.sqrt(2.5))

    def test_permutation_invariant(self):
        values = [97.9, 98.0, 98.1, 98.2, 98.3]
        a = ex.aggregate([report(dice=v) for v in values], epochs=[1, 2, 3, 4, 5])
        b = ex.aggregate([report(dice=v) for v in reversed(values)],
                         epochs=[5, 4, 3, 2, 1])
        assert a == b

    def test_none_metric_renders_na(self):
        reports = [report() for _ in range(4)]
        reports.append(MetricReport("", 0.0, 0.0, -1.0, None, None, None, None))
        row = ex.aggregate(reports, epochs=[1] * 5)
        assert row["asd"] == "n/a"
        assert row["dice"].endswith(")")

    def test_fold_count_mismatch(self):
        with pytest.raises(FoldCountMismatch):
            ex.aggregate([report()] * 5, epochs=[1] * 4)
        with pytest.raises(FoldCountMismatch):
            ex.aggregate([report()] * 4, epochs=[1] * 4, k=5)
        with pytest.raises(FoldCountMismatch):
            ex.aggregate([report()], epochs=[1])


class TestRenderTable:
    def test_layout(self):
        row = ex.aggregate([report() for _ in range(5)], epochs=[30] * 5)
        text = ex.render_table([("onecycle 24e-5", row), ("plateau 16e-5", row)])
        lines = text.strip().split("\n")
        assert len(lines) == 3
        assert lines[0].startswith("Setting")
        assert "Dice" in lines[0] and "Epochs" in lines[0]
        assert "98.00 (0.00)" in lines[1]


class TestConvergenceLog:
    def traj(self, n=10):
        cfg = OneCycleConfig(max_lr=24e-5, total_epochs=max(n, 3))
        losses = [1.0 / (i + 1) for i in range(n)]
        return simulate_schedule(cfg, losses, train_losses=[0.5] * n)

    def test_header_only_for_empty(self, tmp_path):
        path = tmp_path / "log.csv"
        ex.write_convergence_log([], path)
        assert path.read_text() == "epoch,lr,train_loss,val_loss,stopped\n"

    def test_row_count(self, tmp_path):
        path = tmp_path / "log.csv"
        traj = simulate_schedule(OneCycleConfig(max_lr=24e-5), [0.5] * 75)
        ex.write_convergence_log(traj, path)
        lines = path.read_text().strip().split("\n")
        assert len(lines) == 76

    def test_round_trip_exact(self, tmp_path):
        path = tmp_path / "log.csv"
        traj = self.traj(12)
        ex.write_convergence_log(traj, path)
        assert ex.read_convergence_log(path) == traj

    def test_none_train_loss_round_trip(self, tmp_path):
        path = tmp_path / "log.csv"
        traj = simulate_schedule(OneCycleConfig(max_lr=1e-3, total_epochs=5),
                                 [0.5, 0.4, 0.3], early=EarlyStopConfig())
        ex.write_convergence_log(traj, path)
        back = ex.read_convergence_log(path)
        assert back == traj
        assert back[0].train_loss is None


class TestWriteFoldSpecs:
    def test_one_file_per_fold(self, tmp_path):
        folds = ex.kfold_split([f"{i:03d}" for i in range(10)], k=5, seed=3)
        paths = ex.write_fold_specs(folds, tmp_path)
        assert len(paths) == 5
        import json
        data = json.load(open(paths[2]))
        assert data["fold_index"] == 2
        assert len(data["val_ids"]) == 2
