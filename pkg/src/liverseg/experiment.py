"""Cross-validation bookkeeping and result aggregation.

Folds are produced by shuffling the record ids with NumPy's seeded PCG64
generator (stable across platforms and versions) and slicing the permutation
into k validation chunks whose sizes differ by at most one; every id lands
in exactly one validation set.

Aggregation reports each metric as "mean (sample standard deviation)" across
folds, with two decimals for percentages and distances, three for the
relative volumetric difference and one for epoch counts.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import FoldCountMismatch, IoFailure, TooFewRecords
from .metrics import MetricReport
from .schedulers import TrajectoryRow

# randomly chosen, fixed test records; ids are zero-padded to 3 characters
TEST_RECORD_IDS = (
    "003", "012", "045", "072", "090", "105", "117", "129", "141", "153",
    "169", "178", "193", "205", "220", "236", "246", "258", "268", "280",
    "294", "304", "320",
)


def test_record_ids() -> list[str]:
    """The fixed 23-record held-out test list, in its published order."""
    return list(TEST_RECORD_IDS)


@dataclass(frozen=True)
class FoldSpec:
    fold_index: int
    train_ids: tuple[str, ...]
    val_ids: tuple[str, ...]
    seed: int

    def as_dict(self) -> dict:
        return {
            "fold_index": self.fold_index,
            "seed": self.seed,
            "train_ids": list(self.train_ids),
            "val_ids": list(self.val_ids),
        }


def kfold_split(ids: Sequence[str], k: int, seed: int) -> list[FoldSpec]:
    """Deterministic k-fold split of record ids.

    The validation sets partition the ids; each has ``len(ids) // k`` or one
    more element.  Duplicate ids are rejected because they would break the
    train/validation disjointness guarantee.
    """
    ids = [str(i) for i in ids]
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if len(ids) < k:
        raise TooFewRecords(f"{len(ids)} ids cannot fill {k} folds")
    if len(set(ids)) != len(ids):
        raise ValueError("record ids must be unique")
    order = np.random.default_rng(seed).permutation(len(ids))
    shuffled = [ids[i] for i in order]
    chunks = np.array_split(np.arange(len(ids)), k)
    folds = []
    for fold_index, chunk in enumerate(chunks):
        val = tuple(shuffled[i] for i in chunk)
        val_set = set(val)
        train = tuple(i for i in shuffled if i not in val_set)
        folds.append(FoldSpec(fold_index=fold_index, train_ids=train,
                              val_ids=val, seed=seed))
    return folds


# metric key -> (report attribute or "epochs", decimals)
TABLE_COLUMNS = (
    ("dice", "dice_pct", 2),
    ("iou", "iou_pct", 2),
    ("rvd", "rvd", 3),
    ("asd", "asd_mm", 2),
    ("rmsd", "rmsd_mm", 2),
    ("hd", "msd_mm", 2),
    ("hd95", "hd95_mm", 2),
)


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
    return mean, math.sqrt(var)


def format_mean_std(values: Sequence[float], decimals: int) -> str:
    mean, std = _mean_std(values)
    return f"{mean:.{decimals}f} ({std:.{decimals}f})"


def aggregate(reports: Sequence[MetricReport], epochs: Sequence[int],
              k: Optional[int] = None) -> dict[str, str]:
    """Collapse per-fold results into one formatted "mean (std)" table row.

    ``reports`` holds each fold's mean MetricReport and ``epochs`` the number
    of epochs that fold ran.  Metrics that are undefined (None) in any fold
    render as "n/a".
    """
    if k is not None and len(reports) != k:
        raise FoldCountMismatch(f"expected {k} folds, got {len(reports)}")
    if len(reports) != len(epochs):
        raise FoldCountMismatch(
            f"{len(reports)} reports but {len(epochs)} epoch counts")
    if len(reports) < 2:
        raise FoldCountMismatch("need at least 2 folds for a standard deviation")
    row = {}
    for name, attr, decimals in TABLE_COLUMNS:
        values = [getattr(r, attr) for r in reports]
        if any(v is None for v in values):
            row[name] = "n/a"
        else:
            row[name] = format_mean_std([float(v) for v in values], decimals)
    row["epochs"] = format_mean_std([float(e) for e in epochs], 1)
    return row


TABLE_HEADER = ("Dice", "IoU", "RVD", "ASD", "RMSD", "HD", "95% HD", "Epochs")


def render_table(rows: Sequence[tuple[str, dict[str, str]]]) -> str:
    """Plain-text results table: one labelled line per scheduler/LR setting."""
    keys = [name for name, _, _ in TABLE_COLUMNS] + ["epochs"]
    label_width = max([len(label) for label, _ in rows] + [len("Setting")])
    widths = [
        max([len(header)] + [len(row[key]) for _, row in rows])
        for header, key in zip(TABLE_HEADER, keys)
    ]
    lines = ["  ".join(["Setting".ljust(label_width)]
                       + [h.rjust(w) for h, w in zip(TABLE_HEADER, widths)])]
    for label, row in rows:
        cells = [row[key].rjust(w) for key, w in zip(keys, widths)]
        lines.append("  ".join([label.ljust(label_width)] + cells))
    return "\n".join(lines) + "\n"


CONVERGENCE_HEADER = ("epoch", "lr", "train_loss", "val_loss", "stopped")


def write_convergence_log(trajectory: Sequence[TrajectoryRow], path) -> None:
    """CSV trajectory dump; floats use repr so a read-back is exact."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CONVERGENCE_HEADER)
            for row in trajectory:
                writer.writerow([
                    row.epoch,
                    repr(float(row.lr)),
                    "" if row.train_loss is None else repr(float(row.train_loss)),
                    repr(float(row.val_loss)),
                    int(row.stopped),
                ])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_convergence_log(path) -> list[TrajectoryRow]:
    try:
        with open(path, "r", newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != CONVERGENCE_HEADER:
                raise ValueError(f"unexpected convergence log header {header}")
            return [
                TrajectoryRow(
                    epoch=int(rec[0]),
                    lr=float(rec[1]),
                    train_loss=float(rec[2]) if rec[2] else None,
                    val_loss=float(rec[3]),
                    stopped=bool(int(rec[4])),
                )
                for rec in reader
            ]
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def write_fold_specs(folds: Sequence[FoldSpec], outdir) -> list[str]:
    """One JSON file per fold in ``outdir``; returns the written paths."""
    os.makedirs(outdir, exist_ok=True)
    paths = []
    for fold in folds:
        path = os.path.join(outdir, f"fold_{fold.fold_index}.json")
        try:
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(fold.as_dict(), fh, indent=2)
                fh.write("\n")
        except OSError as exc:
            raise IoFailure(f"cannot write {path}: {exc}") from exc
        paths.append(path)
    return paths
