"""Volumetric segmentation metrics: overlap, volume difference, surface
distances in physical millimetres, and binary cross-entropy.

Distance metrics pool the two directed surface-to-surface distance multisets
(prediction to ground truth and back) into one bag and reduce that: mean for
ASD, root mean square for RMSD, maximum for MSD/HD, and the linearly
interpolated 95th percentile for HD95.  Surfaces are the foreground voxels
with a 6-connected background (or out-of-volume) neighbor; distances are
measured voxel center to voxel center with anisotropic spacing applied.

Degenerate cases: with both masks empty a comparison is perfect by
convention (dice = iou = 100, rvd = 0, distances 0).  With exactly one mask
empty, dice and iou are 0 and every surface metric (and rvd when the ground
truth is the empty one) is reported as None, never silently as 0.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .errors import EmptyGroundTruth, EmptyMask, NonFiniteLoss, ShapeMismatch
from .volume import LabelVolume, Volume

BCE_EPS = 1e-7

# column order follows the reporting convention: overlap, volume, distances
REPORT_FIELDS = ("record_id", "dice_pct", "iou_pct", "rvd",
                 "asd_mm", "rmsd_mm", "msd_mm", "hd95_mm")


@dataclass
class MetricReport:
    """Per-record evaluation values; distance fields are None when undefined."""

    record_id: str
    dice_pct: float
    iou_pct: float
    rvd: Optional[float]
    asd_mm: Optional[float]
    rmsd_mm: Optional[float]
    msd_mm: Optional[float]
    hd95_mm: Optional[float]

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in REPORT_FIELDS}

    def to_json(self) -> str:
        return json.dumps(self.as_dict())

    def to_csv_row(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="")
        writer.writerow(
            "" if v is None else (v if isinstance(v, str) else repr(float(v)))
            for v in (getattr(self, name) for name in REPORT_FIELDS))
        return buf.getvalue()


@dataclass
class SurfaceDistanceBag:
    """Directed nearest-surface distances (mm) between two masks."""

    d_pred_to_gt: np.ndarray
    d_gt_to_pred: np.ndarray

    def pooled(self) -> np.ndarray:
        return np.concatenate([self.d_pred_to_gt, self.d_gt_to_pred])


def _check_pair(pred: LabelVolume, gt: LabelVolume) -> None:
    if pred.dims != gt.dims:
        raise ShapeMismatch(f"pred dims {pred.dims} != gt dims {gt.dims}")
    if pred.spacing != gt.spacing:
        raise ShapeMismatch(f"pred spacing {pred.spacing} != gt spacing {gt.spacing}")


def _foreground(mask: LabelVolume) -> np.ndarray:
    return mask.data != 0


def dice(pred: LabelVolume, gt: LabelVolume) -> float:
    """Dice similarity coefficient in percent; 100 when both masks are empty."""
    _check_pair(pred, gt)
    p, g = _foreground(pred), _foreground(gt)
    total = int(p.sum()) + int(g.sum())
    if total == 0:
        return 100.0
    return 200.0 * int((p & g).sum()) / total


def iou(pred: LabelVolume, gt: LabelVolume) -> float:
    """Intersection over union in percent; 100 when both masks are empty."""
    _check_pair(pred, gt)
    p, g = _foreground(pred), _foreground(gt)
    union = int((p | g).sum())
    if union == 0:
        return 100.0
    return 100.0 * int((p & g).sum()) / union


def rvd(pred: LabelVolume, gt: LabelVolume) -> float:
    """Relative volumetric difference (|P| - |G|) / |G|, signed.

    Negative values mean under-segmentation.
    """
    _check_pair(pred, gt)
    n_gt = int(_foreground(gt).sum())
    if n_gt == 0:
        raise EmptyGroundTruth("rvd is undefined for an empty ground-truth mask")
    return (int(_foreground(pred).sum()) - n_gt) / n_gt


_SIX_CONNECTED = ndimage.generate_binary_structure(3, 1)


def extract_surface(mask: LabelVolume) -> np.ndarray:
    """Boolean grid marking foreground voxels that touch the background.

    A voxel is on the surface when any of its six face neighbors is
    background or outside the volume.
    """
    fg = _foreground(mask)
    if not fg.any():
        return np.zeros_like(fg)
    interior = ndimage.binary_erosion(fg, structure=_SIX_CONNECTED, border_value=0)
    return fg & ~interior


def surface_distances(pred: LabelVolume, gt: LabelVolume) -> SurfaceDistanceBag:
    """Directed distances between the two surfaces, exact to float precision.

    Uses the exact Euclidean distance transform with the volumes' anisotropic
    spacing; equivalent to brute-force nearest-neighbor search over surface
    voxel centers.
    """
    _check_pair(pred, gt)
    surf_p = extract_surface(pred)
    surf_g = extract_surface(gt)
    if not surf_p.any():
        raise EmptyMask("prediction mask is empty, surface distances undefined")
    if not surf_g.any():
        raise EmptyMask("ground-truth mask is empty, surface distances undefined")
    spacing = pred.spacing
    dt_to_g = ndimage.distance_transform_edt(~surf_g, sampling=spacing)
    dt_to_p = ndimage.distance_transform_edt(~surf_p, sampling=spacing)
    return SurfaceDistanceBag(
        d_pred_to_gt=dt_to_g[surf_p],
        d_gt_to_pred=dt_to_p[surf_g],
    )


def _pooled(bag: SurfaceDistanceBag) -> np.ndarray:
    if bag.d_pred_to_gt.size == 0 or bag.d_gt_to_pred.size == 0:
        raise EmptyMask("surface distance bag is empty on one side")
    return bag.pooled()


def asd(bag: SurfaceDistanceBag) -> float:
    """Average symmetric surface distance (mm): mean of the pooled bag."""
    return float(np.mean(_pooled(bag)))


def rmsd(bag: SurfaceDistanceBag) -> float:
    """Root-mean-square symmetric surface distance (mm)."""
    return float(np.sqrt(np.mean(np.square(_pooled(bag)))))


def msd(bag: SurfaceDistanceBag) -> float:
    """Maximum symmetric surface distance (mm), the Hausdorff distance."""
    return float(np.max(_pooled(bag)))


def hd95(bag: SurfaceDistanceBag) -> float:
    """95th percentile (linear interpolation) of the pooled distances (mm)."""
    return float(np.percentile(_pooled(bag), 95))


def bce(prob: Volume, target: LabelVolume) -> float:
    """Mean binary cross-entropy of voxel probabilities against a binary mask.

    Probabilities are clamped to [BCE_EPS, 1 - BCE_EPS] before the log.
    """
    if prob.dims != target.dims:
        raise ShapeMismatch(f"prob dims {prob.dims} != target dims {target.dims}")
    p = np.clip(prob.data.astype(np.float64), BCE_EPS, 1.0 - BCE_EPS)
    if not np.isfinite(prob.data).all():
        raise NonFiniteLoss("probability volume contains non-finite values")
    t = _foreground(target).astype(np.float64)
    return float(-np.mean(t * np.log(p) + (1.0 - t) * np.log1p(-p)))


def evaluate_case(pred: LabelVolume, gt: LabelVolume, record_id: str = "") -> MetricReport:
    """All geometric metrics for one record from a single surface computation."""
    _check_pair(pred, gt)
    p, g = _foreground(pred), _foreground(gt)
    n_p, n_g = int(p.sum()), int(g.sum())
    if n_p == 0 and n_g == 0:
        return MetricReport(record_id, 100.0, 100.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    if n_p == 0 or n_g == 0:
        return MetricReport(
            record_id,
            dice_pct=0.0,
            iou_pct=0.0,
            rvd=(n_p - n_g) / n_g if n_g else None,
            asd_mm=None, rmsd_mm=None, msd_mm=None, hd95_mm=None,
        )
    bag = surface_distances(pred, gt)
    return MetricReport(
        record_id,
        dice_pct=dice(pred, gt),
        iou_pct=iou(pred, gt),
        rvd=rvd(pred, gt),
        asd_mm=asd(bag),
        rmsd_mm=rmsd(bag),
        msd_mm=msd(bag),
        hd95_mm=hd95(bag),
    )


def reports_to_csv(reports) -> str:
    """CSV serialization, one row per record, fixed column order."""
    lines = [",".join(REPORT_FIELDS)]
    lines += [r.to_csv_row() for r in reports]
    return "\n".join(lines) + "\n"
