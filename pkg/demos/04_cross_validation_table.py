"""Five-fold experiment bookkeeping, from id splits to the results table.

Splits a 303-record corpus (minus the fixed 23-record test list) into five
seeded folds, fakes per-fold evaluation summaries for two scheduler
settings, and renders the mean (standard deviation) table row per setting.
"""

import numpy as np

from liverseg import MetricReport, aggregate, kfold_split, render_table, test_record_ids

held_out = test_record_ids()
print(f"fixed test records ({len(held_out)}): {' '.join(held_out)}")

corpus = held_out + [f"{500 + i}" for i in range(280)]
train_ids = [rid for rid in corpus if rid not in set(held_out)]
folds = kfold_split(train_ids, k=5, seed=2024)
for fold in folds:
    print(f"fold {fold.fold_index}: train {len(fold.train_ids)}, "
          f"val {len(fold.val_ids)}, first val ids {fold.val_ids[:3]}")

rng = np.random.default_rng(5)


def fake_fold_results(dice_mu, epochs_mu):
    reports, epochs = [], []
    for _ in range(5):
        dice = rng.normal(dice_mu, 0.05)
        iou = 100 * dice / (200 - dice)  # consistent with the dice value
        reports.append(MetricReport(
            record_id="", dice_pct=dice, iou_pct=iou,
            rvd=rng.normal(-0.008, 0.002),
            asd_mm=rng.normal(0.55, 0.08), rmsd_mm=rng.normal(2.0, 0.3),
            msd_mm=rng.normal(29.0, 4.0), hd95_mm=rng.normal(2.6, 0.4)))
        epochs.append(int(rng.normal(epochs_mu, 2)))
    return reports, epochs


rows = []
for label, dice_mu, epochs_mu in (("onecycle 24e-5", 98.07, 30),
                                  ("plateau 16e-5", 98.12, 22)):
    reports, epochs = fake_fold_results(dice_mu, epochs_mu)
    rows.append((label, aggregate(reports, epochs)))

print()
print(render_table(rows), end="")
