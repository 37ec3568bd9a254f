"""Score a predicted mask against ground truth with all eight quantities.

Creates a spherical "liver" ground truth and a slightly eroded, shifted
prediction, then reports overlap (Dice, IoU), signed volume error (RVD) and
the four symmetric surface-distance statistics in physical millimetres,
plus the BCE loss of a soft probability map.
"""

import numpy as np

from liverseg import LabelVolume, Volume, bce, evaluate_case, reports_to_csv
from liverseg.metrics import surface_distances

rng = np.random.default_rng(1)
shape = (40, 64, 64)
spacing = (2.5, 0.8, 0.8)  # anisotropic, like a real CT
zz, yy, xx = np.meshgrid(*[np.arange(n) for n in shape], indexing="ij")


def ball(cz, cy, cx, r_mm):
    dist2 = (((zz - cz) * spacing[0]) ** 2
             + ((yy - cy) * spacing[1]) ** 2
             + ((xx - cx) * spacing[2]) ** 2)
    return dist2 <= r_mm ** 2


gt = LabelVolume(ball(20, 32, 32, 20.0).astype(np.uint8), spacing=spacing)
pred = LabelVolume(ball(20, 32, 34, 19.0).astype(np.uint8), spacing=spacing)

report = evaluate_case(pred, gt, record_id="294")
print(f"record {report.record_id}")
print(f"  dice  {report.dice_pct:7.2f} %")
print(f"  iou   {report.iou_pct:7.2f} %")
print(f"  rvd   {report.rvd:+8.4f}   (negative = under-segmentation)")
print(f"  asd   {report.asd_mm:7.3f} mm")
print(f"  rmsd  {report.rmsd_mm:7.3f} mm")
print(f"  msd   {report.msd_mm:7.3f} mm  (Hausdorff)")
print(f"  hd95  {report.hd95_mm:7.3f} mm")

# the distance bag behind the four surface metrics
bag = surface_distances(pred, gt)
print(f"surface voxels: pred {bag.d_pred_to_gt.size}, gt {bag.d_gt_to_pred.size}; "
      f"largest gap {bag.pooled().max():.2f} mm")

# BCE of a soft probability map against the ground truth
logits = np.where(pred.data > 0, 4.0, -4.0) + rng.normal(0, 1.0, shape)
probs = Volume(1.0 / (1.0 + np.exp(-logits)), spacing=spacing)
print(f"bce of noisy sigmoid probabilities: {bce(probs, gt):.4f}")

print()
print(reports_to_csv([report]), end="")
