"""Exception hierarchy shared by all liverseg modules."""


class LiversegError(Exception):
    """Base class for all domain errors raised by this package."""


# --- volume I/O -------------------------------------------------------------

class MalformedHeader(LiversegError):
    """File header is not a valid little-endian NIfTI-1 header."""


class UnsupportedDatatype(LiversegError):
    """Header datatype code is outside the supported subset."""


class TruncatedData(LiversegError):
    """Voxel payload is shorter than the header-declared dimensions imply."""


class IoFailure(LiversegError):
    """Underlying file read/write failed."""


# --- preprocessing ----------------------------------------------------------

class InvalidOrientationCode(LiversegError):
    """Orientation code is not a permutation of distinct anatomical axes."""


class DegenerateOutputDims(LiversegError):
    """Rescaling would produce an axis with fewer than one voxel."""


class RangeViolation(LiversegError):
    """Voxel value lies outside the expected intensity window."""


class TileLargerThanSlice(LiversegError):
    """CLAHE tile grid has more tiles than the slice has pixels per axis."""


class ConstantVolume(LiversegError):
    """Volume has zero intensity variance, normalization is undefined."""


# --- schedulers -------------------------------------------------------------

class StepOutOfRange(LiversegError):
    """Requested step index lies beyond the configured schedule length."""


class NonFiniteLoss(LiversegError):
    """Observed loss is NaN or infinite."""


# --- metrics ----------------------------------------------------------------

class ShapeMismatch(LiversegError):
    """Two volumes that must share geometry do not."""


class EmptyGroundTruth(LiversegError):
    """Ground-truth mask has no foreground voxels."""


class EmptyMask(LiversegError):
    """A mask required to be nonempty has no foreground voxels."""


# --- experiment -------------------------------------------------------------

class TooFewRecords(LiversegError):
    """Not enough record ids to form the requested number of folds."""


class FoldCountMismatch(LiversegError):
    """Per-fold inputs do not agree on the number of folds."""


# --- mesh export ------------------------------------------------------------

class InvalidLevel(LiversegError):
    """Isosurface level is outside the open interval (0, 1)."""


class DuplicateMaterial(LiversegError):
    """Two meshes passed to the OBJ exporter share a material name."""


class LabelAbsentWarning(UserWarning):
    """Requested label does not occur in the mask; an empty mesh is returned."""
