"""Reading and writing volumetric records as a NIfTI-1 single-file subset.

Supported files are little-endian ``.nii`` (magic ``n+1``), optionally gzip
compressed; gzip is detected from the two magic bytes, not the extension.

Honored header fields: ``dim`` (3-D only), ``datatype`` (uint8, int8, int16,
uint16, int32, float32), ``pixdim[1..3]``, ``vox_offset``, ``scl_slope`` /
``scl_inter``, and the orientation carried by ``srow_*`` (``sform_code > 0``)
or the quaternion fields (``qform_code > 0``); with neither code set, the
disk axes are assumed to be ``R``/``A``/``S``.  Orientation is reduced to the
dominant axis direction of each voxel axis.  Every other field is ignored.

On-disk voxel order is x fastest, z slowest, which maps directly onto the
package's ``(z, y, x)`` C-order arrays without transposition.  Writing emits
float32 for images and the label grid's own integer dtype for masks, with an
axis-aligned sform encoding spacing and orientation.
"""

from __future__ import annotations

import gzip
import io
import os

import numpy as np

from .errors import IoFailure, MalformedHeader, TruncatedData, UnsupportedDatatype
from .volume import LabelVolume, Volume, axis_direction, direction_to_code, validate_orientation

HEADER_SIZE = 348
_GZIP_MAGIC = b"\x1f\x8b"

_HEADER_DTYPE = np.dtype([
    ("sizeof_hdr", "<i4"),
    ("data_type", "S10"),
    ("db_name", "S18"),
    ("extents", "<i4"),
    ("session_error", "<i2"),
    ("regular", "S1"),
    ("dim_info", "u1"),
    ("dim", "<i2", (8,)),
    ("intent_p1", "<f4"),
    ("intent_p2", "<f4"),
    ("intent_p3", "<f4"),
    ("intent_code", "<i2"),
    ("datatype", "<i2"),
    ("bitpix", "<i2"),
    ("slice_start", "<i2"),
    ("pixdim", "<f4", (8,)),
    ("vox_offset", "<f4"),
    ("scl_slope", "<f4"),
    ("scl_inter", "<f4"),
    ("slice_end", "<i2"),
    ("slice_code", "u1"),
    ("xyzt_units", "u1"),
    ("cal_max", "<f4"),
    ("cal_min", "<f4"),
    ("slice_duration", "<f4"),
    ("toffset", "<f4"),
    ("glmax", "<i4"),
    ("glmin", "<i4"),
    ("descrip", "S80"),
    ("aux_file", "S24"),
    ("qform_code", "<i2"),
    ("sform_code", "<i2"),
    ("quatern_b", "<f4"),
    ("quatern_c", "<f4"),
    ("quatern_d", "<f4"),
    ("qoffset_x", "<f4"),
    ("qoffset_y", "<f4"),
    ("qoffset_z", "<f4"),
    ("srow_x", "<f4", (4,)),
    ("srow_y", "<f4", (4,)),
    ("srow_z", "<f4", (4,)),
    ("intent_name", "S16"),
    ("magic", "S4"),
])
assert _HEADER_DTYPE.itemsize == HEADER_SIZE

_DTYPE_CODES = {
    2: np.dtype("<u1"),     # uint8
    4: np.dtype("<i2"),     # int16
    8: np.dtype("<i4"),     # int32
    16: np.dtype("<f4"),    # float32
    256: np.dtype("<i1"),   # int8
    512: np.dtype("<u2"),   # uint16
}
_CODE_FOR_DTYPE = {dt.str.lstrip("<|"): code for code, dt in _DTYPE_CODES.items()}


def _read_bytes(path) -> bytes:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if raw[:2] == _GZIP_MAGIC:
        try:
            raw = gzip.decompress(raw)
        except (OSError, EOFError) as exc:
            raise IoFailure(f"corrupt gzip stream in {path}: {exc}") from exc
    return raw


def _quaternion_rotation(b: float, c: float, d: float) -> np.ndarray:
    a2 = 1.0 - (b * b + c * c + d * d)
    a = np.sqrt(a2) if a2 > 0 else 0.0
    return np.array([
        [a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)],
        [2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b)],
        [2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - b * b - c * c],
    ])


def _orientation_from_header(hdr) -> str:
    """Dominant-axis orientation codes, in array (z, y, x) order."""
    if hdr["sform_code"] > 0:
        mat = np.vstack([hdr["srow_x"][:3], hdr["srow_y"][:3], hdr["srow_z"][:3]])
    elif hdr["qform_code"] > 0:
        mat = _quaternion_rotation(
            float(hdr["quatern_b"]), float(hdr["quatern_c"]), float(hdr["quatern_d"]))
        qfac = float(hdr["pixdim"][0])
        if qfac == -1.0:
            mat[:, 2] *= -1.0
    else:
        mat = np.eye(3)
    codes_disk = []
    for disk_axis in range(3):
        col = mat[:, disk_axis]
        if not np.any(col):
            raise MalformedHeader("orientation matrix has a zero column")
        codes_disk.append(direction_to_code(col))
    code = "".join(codes_disk[::-1])  # disk (x, y, z) -> array (z, y, x)
    try:
        return validate_orientation(code)
    except Exception as exc:
        raise MalformedHeader(f"orientation matrix is degenerate: {exc}") from exc


def _parse_header(raw: bytes, path):
    if len(raw) < HEADER_SIZE:
        raise MalformedHeader(f"{path}: file shorter than a NIfTI-1 header")
    hdr = np.frombuffer(raw[:HEADER_SIZE], dtype=_HEADER_DTYPE)[0]
    size = int(hdr["sizeof_hdr"])
    if size != HEADER_SIZE:
        if size == 1543569408:  # 348 byte-swapped
            raise MalformedHeader(f"{path}: big-endian NIfTI is not supported")
        raise MalformedHeader(f"{path}: bad sizeof_hdr {size}")
    magic = bytes(hdr["magic"]).rstrip(b"\x00")
    if magic != b"n+1":
        raise MalformedHeader(f"{path}: bad magic {magic!r} (single-file n+1 expected)")
    ndim = int(hdr["dim"][0])
    if not 1 <= ndim <= 7:
        raise MalformedHeader(f"{path}: bad dim[0]={ndim}")
    used = [int(d) for d in hdr["dim"][1:ndim + 1]]
    if any(d < 1 for d in used):
        raise MalformedHeader(f"{path}: nonpositive dimension in {used}")
    if any(d != 1 for d in used[3:]):
        raise MalformedHeader(f"{path}: only 3-D volumes are supported, dim={used}")
    dims_disk = (used + [1, 1, 1])[:3]
    code = int(hdr["datatype"])
    if code not in _DTYPE_CODES:
        raise UnsupportedDatatype(f"{path}: datatype code {code} not in supported subset")
    pixdim = [float(p) for p in hdr["pixdim"][1:4]]
    if any(not np.isfinite(p) or p <= 0 for p in pixdim):
        raise MalformedHeader(f"{path}: nonpositive pixdim {pixdim}")
    vox_offset = int(hdr["vox_offset"])
    if vox_offset < HEADER_SIZE:
        raise MalformedHeader(f"{path}: vox_offset {vox_offset} overlaps the header")
    return hdr, dims_disk, _DTYPE_CODES[code], pixdim, vox_offset


def _read_array(path):
    raw = _read_bytes(path)
    hdr, (nx, ny, nz), dtype, pixdim, vox_offset = _parse_header(raw, path)
    nvox = nx * ny * nz
    payload = raw[vox_offset:vox_offset + nvox * dtype.itemsize]
    if len(payload) < nvox * dtype.itemsize:
        raise TruncatedData(
            f"{path}: payload holds {len(payload)} bytes, "
            f"{nvox * dtype.itemsize} required by dim ({nx},{ny},{nz})")
    arr = np.frombuffer(payload, dtype=dtype, count=nvox).reshape((nz, ny, nx)).copy()
    spacing = (pixdim[2], pixdim[1], pixdim[0])  # disk (x, y, z) -> array (z, y, x)
    orientation = _orientation_from_header(hdr)
    slope = float(hdr["scl_slope"])
    inter = float(hdr["scl_inter"])
    if slope == 0.0:  # NIfTI convention: 0 means "no scaling stored"
        slope, inter = 1.0, 0.0
    return arr, spacing, orientation, slope, inter


def read_volume(path) -> Volume:
    """Read a scalar volume, applying any header scale/intercept.

    Values are converted to float32.  The affine scaling is skipped entirely
    when it is the identity so float payloads round-trip bit-exact.
    """
    arr, spacing, orientation, slope, inter = _read_array(path)
    data = arr.astype(np.float32, copy=False) if arr.dtype != np.float32 else arr
    if (slope, inter) != (1.0, 0.0):
        data = data.astype(np.float32) * np.float32(slope) + np.float32(inter)
    return Volume(data=data, spacing=spacing, orientation=orientation)


def read_labels(path) -> LabelVolume:
    """Read an integer mask file as a LabelVolume.

    The on-disk datatype must be an integer type and the scale/intercept must
    be the identity, otherwise the file does not hold labels.
    """
    arr, spacing, orientation, slope, inter = _read_array(path)
    if arr.dtype.kind not in "iu":
        raise UnsupportedDatatype(f"{path}: label files must use an integer datatype")
    if (slope, inter) != (1.0, 0.0):
        raise UnsupportedDatatype(f"{path}: scaled intensities cannot be labels")
    return LabelVolume(data=arr, spacing=spacing, orientation=orientation)


def _build_header(vol: Volume | LabelVolume, dtype: np.dtype) -> bytes:
    nz, ny, nx = vol.dims
    sz, sy, sx = vol.spacing
    hdr = np.zeros((), dtype=_HEADER_DTYPE)
    hdr["sizeof_hdr"] = HEADER_SIZE
    hdr["dim"] = (3, nx, ny, nz, 1, 1, 1, 1)
    hdr["datatype"] = _CODE_FOR_DTYPE[dtype.str.lstrip("<|")]
    hdr["bitpix"] = dtype.itemsize * 8
    hdr["pixdim"] = (1.0, sx, sy, sz, 0.0, 0.0, 0.0, 0.0)
    hdr["vox_offset"] = float(HEADER_SIZE + 4)
    hdr["scl_slope"] = 1.0
    hdr["scl_inter"] = 0.0
    hdr["xyzt_units"] = 2  # millimetres
    hdr["sform_code"] = 1
    # axis-aligned affine: disk voxel axis i is array axis 2-i
    mat = np.zeros((3, 4))
    for disk_axis, (code_char, step) in enumerate(
            zip(vol.orientation[::-1], (sx, sy, sz))):
        mat[:, disk_axis] = axis_direction(code_char) * step
    hdr["srow_x"], hdr["srow_y"], hdr["srow_z"] = mat[0], mat[1], mat[2]
    hdr["magic"] = b"n+1"
    return hdr.tobytes()


def write_volume(vol: Volume | LabelVolume, path) -> None:
    """Write a volume or mask; ``read_volume``/``read_labels`` invert it.

    Images are stored as float32, masks as their canonical integer dtype.
    A ``.gz`` extension selects gzip compression (mtime pinned to 0 so equal
    volumes produce byte-identical files).
    """
    dtype = np.dtype("<f4") if isinstance(vol, Volume) else vol.data.dtype.newbyteorder("<")
    blob = _build_header(vol, dtype) + b"\x00" * 4 + np.ascontiguousarray(
        vol.data.astype(dtype, copy=False)).tobytes()
    try:
        if str(path).endswith(".gz"):
            buf = io.BytesIO()
            with gzip.GzipFile(fileobj=buf, mode="wb", mtime=0) as gz:
                gz.write(blob)
            blob = buf.getvalue()
        tmp = f"{path}.tmp{os.getpid()}"
        with open(tmp, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
