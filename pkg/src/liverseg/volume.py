"""Volumetric data containers and the orientation code convention.

Array layout used across the whole package: every 3-D array has shape
``(slices, rows, columns)`` = ``(z, y, x)`` and is C-contiguous, so the
in-plane x axis varies fastest in memory.  ``spacing`` (mm per voxel) and
``orientation`` triples follow the same axis order as the array.

Orientation codes are RAS-style 3-character strings, one character per array
axis, naming the anatomical direction in which the axis index increases:
``R``/``L`` (patient right/left), ``A``/``P`` (anterior/posterior),
``S``/``I`` (superior/inferior).  Each anatomical axis must appear exactly
once.  The package canonical is ``"SAR"``: axis 0 runs inferior to superior,
axis 1 posterior to anterior, axis 2 left to right.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidOrientationCode

# code char -> (world axis index, sign); world axes are x=0, y=1, z=2 with
# +x=R, +y=A, +z=S (the usual RAS world frame)
_CODE_TO_WORLD = {
    "R": (0, 1), "L": (0, -1),
    "A": (1, 1), "P": (1, -1),
    "S": (2, 1), "I": (2, -1),
}
_WORLD_TO_CODE = {(ax, sg): code for code, (ax, sg) in _CODE_TO_WORLD.items()}

CANONICAL_ORIENTATION = "SAR"


def validate_orientation(code: str) -> str:
    """Check an orientation code triple, returning it uppercased.

    Raises InvalidOrientationCode unless the three characters name three
    distinct anatomical axes.
    """
    if not isinstance(code, str) or len(code) != 3:
        raise InvalidOrientationCode(f"orientation code must be 3 characters, got {code!r}")
    code = code.upper()
    axes = []
    for ch in code:
        if ch not in _CODE_TO_WORLD:
            raise InvalidOrientationCode(f"unknown orientation character {ch!r} in {code!r}")
        axes.append(_CODE_TO_WORLD[ch][0])
    if len(set(axes)) != 3:
        raise InvalidOrientationCode(f"orientation {code!r} repeats an anatomical axis")
    return code


def axis_direction(code_char: str) -> np.ndarray:
    """Unit world-direction vector (RAS frame) for one orientation character."""
    ax, sign = _CODE_TO_WORLD[code_char]
    vec = np.zeros(3)
    vec[ax] = sign
    return vec


def world_axis(code_char: str) -> tuple[int, int]:
    """(world axis index, sign) for one orientation character."""
    return _CODE_TO_WORLD[code_char]


def direction_to_code(vec) -> str:
    """Orientation character for the dominant axis of a direction vector."""
    vec = np.asarray(vec, dtype=float)
    ax = int(np.argmax(np.abs(vec)))
    if vec[ax] == 0:
        raise InvalidOrientationCode("zero direction vector has no dominant axis")
    return _WORLD_TO_CODE[(ax, 1 if vec[ax] > 0 else -1)]


def _as_spacing(spacing) -> tuple[float, float, float]:
    vals = tuple(float(np.float32(s)) for s in spacing)
    if len(vals) != 3:
        raise ValueError(f"spacing must have 3 components, got {len(vals)}")
    if any(not np.isfinite(s) or s <= 0 for s in vals):
        raise ValueError(f"spacing components must be positive, got {vals}")
    return vals


@dataclass
class Volume:
    """Scalar voxel grid with physical spacing and orientation metadata.

    ``data`` is held as float32 (the canonical image scalar).  ``spacing`` is
    rounded to float32 precision on construction because that is all the
    NIfTI pixdim field can carry; this keeps write/read round-trips exact.
    """

    data: np.ndarray
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    orientation: str = CANONICAL_ORIENTATION

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 3:
            raise ValueError(f"volume data must be 3-D, got shape {arr.shape}")
        self.data = np.ascontiguousarray(arr, dtype=np.float32)
        self.spacing = _as_spacing(self.spacing)
        self.orientation = validate_orientation(self.orientation)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape


@dataclass
class LabelVolume:
    """Integer label grid sharing Volume's geometry conventions.

    Labels must be nonnegative.  The dtype is canonicalized to the smallest
    of uint8/uint16/int32 that holds the largest label, which is also the
    datatype used on disk.
    """

    data: np.ndarray
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    orientation: str = CANONICAL_ORIENTATION

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 3:
            raise ValueError(f"label data must be 3-D, got shape {arr.shape}")
        if arr.dtype.kind not in "iub":
            raise ValueError(f"labels must be integers, got dtype {arr.dtype}")
        if arr.size and arr.min() < 0:
            raise ValueError("labels must be nonnegative")
        top = int(arr.max()) if arr.size else 0
        if top <= np.iinfo(np.uint8).max:
            dtype = np.uint8
        elif top <= np.iinfo(np.uint16).max:
            dtype = np.uint16
        else:
            dtype = np.int32
        self.data = np.ascontiguousarray(arr, dtype=dtype)
        self.spacing = _as_spacing(self.spacing)
        self.orientation = validate_orientation(self.orientation)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape

    def labels(self) -> set[int]:
        """Set of label values present in the grid."""
        return {int(v) for v in np.unique(self.data)}


def same_geometry(a: Volume | LabelVolume, b: Volume | LabelVolume) -> bool:
    return a.dims == b.dims and a.spacing == b.spacing and a.orientation == b.orientation
