"""The CT preprocessing pipeline, from raw volume to 2.5D slabs.

Steps run in a fixed order: reorient, rescale, intensity clip, window
standardization to [0, 1], per-slice CLAHE, per-volume z-score
normalization, and finally the slab split that turns each z slice into a
stack of adjacent slices.  Masks ride along through the two geometric steps
only, with nearest-neighbor resampling so no new labels appear.

The window defaults follow the usual liver CT choices: clip to [-100, 400]
HU and rescale the volume by one half on every axis (doubling the voxel
spacing).  CLAHE runs per 2-D slice on a 256-bin histogram with an 8x8 tile
grid and a clip limit of 2 (a multiple of the mean bin count, as in OpenCV);
``math.inf`` disables clipping, reducing each tile to plain histogram
equalization with CDF-min normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.ndimage import map_coordinates

from .errors import (
    ConstantVolume,
    DegenerateOutputDims,
    RangeViolation,
    ShapeMismatch,
    TileLargerThanSlice,
)
from .kvconfig import read_keyvalues
from .volume import (
    CANONICAL_ORIENTATION,
    LabelVolume,
    Volume,
    same_geometry,
    validate_orientation,
    world_axis,
)

CLAHE_BINS = 256


@dataclass(frozen=True)
class PreprocessConfig:
    clip_lo: float = -100.0
    clip_hi: float = 400.0
    rescale_factor: float = 0.5
    clahe_clip_limit: float = 2.0
    clahe_tiles: tuple[int, int] = (8, 8)
    slab_size: int = 5
    target_orientation: str = CANONICAL_ORIENTATION

    def __post_init__(self):
        if not self.clip_lo < self.clip_hi:
            raise ValueError("clip_lo must be below clip_hi")
        if not 0.0 < self.rescale_factor <= 1.0:
            raise ValueError("rescale_factor must lie in (0, 1]")
        if not self.clahe_clip_limit > 0:
            raise ValueError("clahe_clip_limit must be positive")
        if len(self.clahe_tiles) != 2 or any(t < 1 for t in self.clahe_tiles):
            raise ValueError("clahe_tiles must be a pair of positive integers")
        if self.slab_size < 1 or self.slab_size % 2 == 0:
            raise ValueError("slab_size must be odd and positive")
        validate_orientation(self.target_orientation)


def load_config(path) -> PreprocessConfig:
    """Build a PreprocessConfig from a key=value file; unknown keys fail."""
    raw = read_keyvalues(path)
    return config_from_mapping(raw)


def config_from_mapping(raw: dict[str, str]) -> PreprocessConfig:
    kwargs = {}
    parsers = {
        "clip_lo": float,
        "clip_hi": float,
        "rescale_factor": float,
        "clahe_clip_limit": float,
        "slab_size": int,
        "target_orientation": str,
        "clahe_tiles": _parse_tiles,
    }
    for key, text in raw.items():
        if key not in parsers:
            raise ValueError(f"unknown preprocessing setting {key!r}")
        kwargs[key] = parsers[key](text)
    return PreprocessConfig(**kwargs)


def _parse_tiles(text: str) -> tuple[int, int]:
    parts = text.replace("x", ",").split(",")
    if len(parts) != 2:
        raise ValueError(f"clahe_tiles must look like '8x8', got {text!r}")
    return int(parts[0]), int(parts[1])


@dataclass
class Slab:
    """A stack of adjacent slices centered on one source slice."""

    slices: np.ndarray        # (slab_size, rows, columns)
    center_index: int
    record_id: str = ""


def _rebuild(template, data, spacing=None, orientation=None):
    cls = Volume if isinstance(template, Volume) else LabelVolume
    return cls(
        data=data,
        spacing=template.spacing if spacing is None else spacing,
        orientation=template.orientation if orientation is None else orientation,
    )


def reorient(vol: Volume | LabelVolume, target: str) -> Volume | LabelVolume:
    """Permute and flip axes so the volume's orientation equals ``target``.

    The voxel multiset is preserved; dims and spacing are permuted with the
    axes and data is reversed along any axis whose direction flips.
    """
    target = validate_orientation(target)
    source = vol.orientation
    if source == target:
        return _rebuild(vol, vol.data)
    # map world axis -> (source array axis, sign along it)
    by_world = {world_axis(ch)[0]: (j, world_axis(ch)[1]) for j, ch in enumerate(source)}
    perm, flips = [], []
    for k, ch in enumerate(target):
        want_world, want_sign = world_axis(ch)
        j, have_sign = by_world[want_world]
        perm.append(j)
        if have_sign != want_sign:
            flips.append(k)
    data = np.transpose(vol.data, perm)
    if flips:
        data = np.flip(data, axis=flips)
    spacing = tuple(vol.spacing[j] for j in perm)
    return _rebuild(vol, data.copy(), spacing=spacing, orientation=target)


def rescale(vol: Volume | LabelVolume, factor: float) -> Volume | LabelVolume:
    """Resample by ``factor`` on every axis; spacing is divided by ``factor``.

    Intensities are interpolated trilinearly; labels use nearest-neighbor so
    the output label set is a subset of the input's.  Output sizes round
    half up; an axis that would round to zero voxels raises.
    """
    if not 0.0 < factor <= 1.0:
        raise ValueError(f"rescale factor must lie in (0, 1], got {factor}")
    if factor == 1.0:
        return _rebuild(vol, vol.data)
    out_dims = tuple(int(math.floor(n * factor + 0.5)) for n in vol.dims)
    if any(n < 1 for n in out_dims):
        raise DegenerateOutputDims(
            f"dims {vol.dims} rescaled by {factor} collapse to {out_dims}")
    # voxel-center aligned sampling grid
    axes = [
        (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        for n_in, n_out in zip(vol.dims, out_dims)
    ]
    coords = np.meshgrid(*axes, indexing="ij")
    order = 1 if isinstance(vol, Volume) else 0
    data = map_coordinates(vol.data, coords, order=order, mode="nearest")
    spacing = tuple(s / factor for s in vol.spacing)
    return _rebuild(vol, data, spacing=spacing)


def clip(vol: Volume, lo: float, hi: float) -> Volume:
    """Clamp intensities into [lo, hi]; interior values pass untouched."""
    if not lo < hi:
        raise ValueError(f"clip window is empty: [{lo}, {hi}]")
    return _rebuild(vol, np.clip(vol.data, np.float32(lo), np.float32(hi)))


def standardize_range(vol: Volume, lo: float, hi: float) -> Volume:
    """Affinely map the window [lo, hi] onto [0, 1]."""
    if not lo < hi:
        raise ValueError(f"window is empty: [{lo}, {hi}]")
    data = vol.data
    if not np.all((data >= lo) & (data <= hi)):
        raise RangeViolation(f"voxels outside [{lo}, {hi}]; clip first")
    scaled = (data - np.float32(lo)) / np.float32(hi - lo)
    return _rebuild(vol, scaled)


def _clahe_tile_luts(bins2d, spans_y, spans_x, clip_limit):
    """Per-tile bin-to-value lookup tables, clipped and CDF-normalized."""
    n_ty, n_tx = len(spans_y), len(spans_x)
    luts = np.empty((n_ty, n_tx, CLAHE_BINS))
    for ty, (y0, y1) in enumerate(spans_y):
        for tx, (x0, x1) in enumerate(spans_x):
            hist = np.bincount(
                bins2d[y0:y1, x0:x1].ravel(), minlength=CLAHE_BINS).astype(float)
            n_pix = hist.sum()
            if math.isfinite(clip_limit):
                ceiling = max(clip_limit * n_pix / CLAHE_BINS, 1.0)
                excess = np.maximum(hist - ceiling, 0.0).sum()
                hist = np.minimum(hist, ceiling) + excess / CLAHE_BINS
            cdf = np.cumsum(hist)
            first = np.nonzero(hist)[0][0]
            cdf_min, total = cdf[first], cdf[-1]
            if total > cdf_min:
                lut = np.clip((cdf - cdf_min) / (total - cdf_min), 0.0, 1.0)
            else:
                # single occupied bin: fall back to the bin-center identity
                lut = (np.arange(CLAHE_BINS) + 0.5) / CLAHE_BINS
            luts[ty, tx] = lut
    return luts


def _tile_spans(length, n_tiles):
    edges = np.linspace(0, length, n_tiles + 1).astype(int)
    return list(zip(edges[:-1], edges[1:]))


def _interp_weights(length, spans):
    """Neighbor tile indices and blend weight for every pixel coordinate."""
    centers = np.array([(a + b - 1) / 2 for a, b in spans])
    pos = np.arange(length, dtype=float)
    hi = np.searchsorted(centers, pos)
    lo = np.clip(hi - 1, 0, len(centers) - 1)
    hi = np.clip(hi, 0, len(centers) - 1)
    denom = centers[hi] - centers[lo]
    w = np.zeros(length)
    valid = denom > 0
    w[valid] = (pos[valid] - centers[lo][valid]) / denom[valid]
    return lo, hi, np.clip(w, 0.0, 1.0)


def _clahe_slice(img, tiles, clip_limit):
    n_ty, n_tx = tiles
    h, w = img.shape
    if n_ty > h or n_tx > w:
        raise TileLargerThanSlice(
            f"tile grid {tiles} does not fit a {h}x{w} slice")
    bins = np.minimum((img * CLAHE_BINS).astype(np.int64), CLAHE_BINS - 1)
    spans_y = _tile_spans(h, n_ty)
    spans_x = _tile_spans(w, n_tx)
    luts = _clahe_tile_luts(bins, spans_y, spans_x, clip_limit)
    ty0, ty1, wy = _interp_weights(h, spans_y)
    tx0, tx1, wx = _interp_weights(w, spans_x)
    wy = wy[:, None]
    wx = wx[None, :]
    r0, r1 = ty0[:, None], ty1[:, None]
    c0, c1 = tx0[None, :], tx1[None, :]
    out = ((1 - wy) * (1 - wx) * luts[r0, c0, bins]
           + (1 - wy) * wx * luts[r0, c1, bins]
           + wy * (1 - wx) * luts[r1, c0, bins]
           + wy * wx * luts[r1, c1, bins])
    return out


def clahe(vol: Volume, cfg: PreprocessConfig) -> Volume:
    """Contrast-limited adaptive histogram equalization, slice by slice.

    Expects intensities already standardized to [0, 1] and returns values in
    the same range.  Each tile's mapping is monotone in the input bin.
    """
    data = vol.data
    if data.size and (np.nanmin(data) < 0.0 or np.nanmax(data) > 1.0):
        raise RangeViolation("clahe expects intensities in [0, 1]")
    out = np.empty_like(data, dtype=np.float32)
    for z in range(data.shape[0]):
        out[z] = _clahe_slice(data[z], cfg.clahe_tiles, cfg.clahe_clip_limit)
    return _rebuild(vol, out)


def normalize(vol: Volume) -> Volume:
    """Zero-mean, unit-variance standardization over the whole volume.

    Uses the population standard deviation; a constant volume has none and
    raises ConstantVolume.
    """
    data = vol.data.astype(np.float64)
    mu = data.mean()
    sigma = data.std()
    if sigma == 0.0 or not np.isfinite(sigma):
        raise ConstantVolume("volume has zero intensity variance")
    return _rebuild(vol, ((data - mu) / sigma).astype(np.float32))


def to_slabs(vol: Volume, slab_size: int, record_id: str = "") -> list[Slab]:
    """One slab per z slice; stacks of ``slab_size`` adjacent slices.

    Slabs centered near the volume ends replicate the edge slice rather
    than padding with air.
    """
    if slab_size < 1 or slab_size % 2 == 0:
        raise ValueError(f"slab_size must be odd and positive, got {slab_size}")
    half = slab_size // 2
    nz = vol.dims[0]
    slabs = []
    for z in range(nz):
        idx = np.clip(np.arange(z - half, z + half + 1), 0, nz - 1)
        slabs.append(Slab(slices=vol.data[idx].copy(), center_index=z,
                          record_id=record_id))
    return slabs


def run_pipeline(
    vol: Volume,
    mask: Optional[LabelVolume],
    cfg: PreprocessConfig = PreprocessConfig(),
    record_id: str = "",
) -> tuple[list[Slab], Optional[LabelVolume]]:
    """Apply the full preprocessing chain in its fixed order.

    The mask, when given, must share the volume's geometry; it only goes
    through the geometric steps (reorientation and rescaling, with
    nearest-neighbor sampling).
    """
    if mask is not None and not same_geometry(vol, mask):
        raise ShapeMismatch("volume and mask must share dims/spacing/orientation")
    vol = reorient(vol, cfg.target_orientation)
    vol = rescale(vol, cfg.rescale_factor)
    vol = clip(vol, cfg.clip_lo, cfg.clip_hi)
    vol = standardize_range(vol, cfg.clip_lo, cfg.clip_hi)
    vol = clahe(vol, cfg)
    vol = normalize(vol)
    slabs = to_slabs(vol, cfg.slab_size, record_id)
    if mask is not None:
        mask = reorient(mask, cfg.target_orientation)
        mask = rescale(mask, cfg.rescale_factor)
    return slabs, mask


def write_slabs(slabs: list[Slab], outdir) -> str:
    """Save slabs as .npy tensors plus a manifest.csv; returns manifest path."""
    import csv
    import os

    os.makedirs(outdir, exist_ok=True)
    manifest = os.path.join(outdir, "manifest.csv")
    with open(manifest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["filename", "record_id", "center_index",
                         "planes", "rows", "columns"])
        for slab in slabs:
            stem = slab.record_id if slab.record_id else "record"
            name = f"slab_{stem}_{slab.center_index:04d}.npy"
            np.save(os.path.join(outdir, name), slab.slices)
            writer.writerow([name, slab.record_id, slab.center_index,
                             *slab.slices.shape])
    return manifest
