"""Scalar volumes, binary masks, MetaImage-style IO and isotropic resampling.

Arrays are indexed ``[x, y, z]``; the on-disk raw payload is x-fastest
(Fortran order), little-endian.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimsMismatch,
    GeometryMismatch,
    IoFailure,
    MissingHeaderField,
    NonPositiveTarget,
    UnsupportedElementType,
)

DEFAULT_SPACING_MM = 0.75
GEOMETRY_TOL_MM = 1e-6

_ELEMENT_TYPES = {"MET_SHORT": np.dtype("<i2"), "MET_FLOAT": np.dtype("<f4")}
_REQUIRED_KEYS = ("NDims", "DimSize", "ElementSpacing", "ElementType", "ElementDataFile")


def _as_triple(values, cast=float) -> tuple:
    t = tuple(cast(v) for v in values)
    if len(t) != 3:
        raise ValueError(f"expected 3 components, got {len(t)}")
    return t


@dataclass(frozen=True, eq=False)
class ScalarVolume:
    """3D grid of HU intensities with physical spacing and origin (mm)."""

    data: np.ndarray
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, copy=True)
        if data.ndim != 3 or min(data.shape) < 1:
            raise ValueError(f"volume data must be a non-empty 3D array, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("volume contains non-finite intensities")
        spacing = _as_triple(self.spacing)
        if min(spacing) <= 0:
            raise ValueError(f"spacing must be strictly positive, got {spacing}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", _as_triple(self.origin))

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(int(n) for n in self.data.shape)

    def same_grid(self, other) -> bool:
        return same_geometry(self, other)


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Boolean grid sharing a volume's geometry."""

    data: np.ndarray
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        data = np.array(self.data, dtype=bool, copy=True)
        if data.ndim != 3 or min(data.shape) < 1:
            raise ValueError(f"mask data must be a non-empty 3D array, got shape {data.shape}")
        spacing = _as_triple(self.spacing)
        if min(spacing) <= 0:
            raise ValueError(f"spacing must be strictly positive, got {spacing}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", _as_triple(self.origin))

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(int(n) for n in self.data.shape)

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.data))

    def with_data(self, data) -> "BinaryMask":
        return BinaryMask(data, self.spacing, self.origin)

    @classmethod
    def like(cls, ref, data) -> "BinaryMask":
        return cls(data, ref.spacing, ref.origin)


def same_geometry(a, b, tol: float = GEOMETRY_TOL_MM) -> bool:
    return (
        a.dims == b.dims
        and all(abs(p - q) <= tol for p, q in zip(a.spacing, b.spacing))
        and all(abs(p - q) <= tol for p, q in zip(a.origin, b.origin))
    )


def check_geometry(a, b) -> None:
    if not same_geometry(a, b):
        raise GeometryMismatch(
            f"geometry differs: dims {a.dims} vs {b.dims}, spacing {a.spacing} vs {b.spacing}, "
            f"origin {a.origin} vs {b.origin}"
        )


# ---------------------------------------------------------------- file IO

def _parse_header(path: Path) -> dict[str, str]:
    fields = {}
    try:
        text = path.read_text(encoding="ascii")
    except OSError as exc:
        raise IoFailure(f"cannot read header {path}: {exc}") from exc
    for line in text.splitlines():
        if "=" not in line:
            continue
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    return fields


def read_volume(path) -> ScalarVolume:
    path = Path(path)
    fields = _parse_header(path)
    for key in _REQUIRED_KEYS:
        if key not in fields:
            raise MissingHeaderField(f"{path}: header lacks {key}")
    if int(fields["NDims"]) != 3:
        raise MissingHeaderField(f"{path}: NDims must be 3, got {fields['NDims']}")
    etype = fields["ElementType"]
    if etype not in _ELEMENT_TYPES:
        raise UnsupportedElementType(f"{path}: ElementType {etype}")
    dtype = _ELEMENT_TYPES[etype]
    if fields.get("ElementByteOrderMSB", "False").lower() == "true":
        dtype = dtype.newbyteorder(">")
    dims = _as_triple(fields["DimSize"].split(), int)
    spacing = _as_triple(fields["ElementSpacing"].split())
    origin = _as_triple(fields.get("Offset", "0 0 0").split())

    raw_path = path.parent / fields["ElementDataFile"]
    try:
        payload = raw_path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read payload {raw_path}: {exc}") from exc
    expected = math.prod(dims) * dtype.itemsize
    if len(payload) != expected:
        raise DimsMismatch(
            f"{raw_path}: {len(payload)} bytes, expected {expected} for dims {dims} of {etype}"
        )
    flat = np.frombuffer(payload, dtype=dtype)
    data = flat.reshape(dims, order="F").astype(np.float64)
    return ScalarVolume(data, spacing, origin)


def _fmt(values) -> str:
    return " ".join(repr(float(v)) if isinstance(v, float) else str(v) for v in values)


def _pick_element_type(data: np.ndarray) -> str:
    if np.all(data == np.round(data)) and data.min() >= -32768 and data.max() <= 32767:
        return "MET_SHORT"
    return "MET_FLOAT"


def write_volume(v: ScalarVolume, path, element_type: str | None = None) -> None:
    """Write a header at ``path`` and a sibling ``.raw`` payload.

    Integral data within int16 range is stored as MET_SHORT unless
    ``element_type`` says otherwise. MET_FLOAT stores float32, so only
    float32-representable data round-trips bit-exactly.
    """
    path = Path(path)
    etype = element_type or _pick_element_type(v.data)
    if etype not in _ELEMENT_TYPES:
        raise UnsupportedElementType(etype)
    raw_name = path.with_suffix(".raw").name
    header = "\n".join(
        [
            "ObjectType = Image",
            "NDims = 3",
            f"DimSize = {_fmt(v.dims)}",
            f"ElementSpacing = {_fmt(v.spacing)}",
            f"Offset = {_fmt(v.origin)}",
            f"ElementType = {etype}",
            "ElementByteOrderMSB = False",
            f"ElementDataFile = {raw_name}",
            "",
        ]
    )
    payload = v.data.astype(_ELEMENT_TYPES[etype]).tobytes(order="F")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(header, encoding="ascii")
        (path.parent / raw_name).write_bytes(payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def write_mask(m: BinaryMask, path) -> None:
    write_volume(ScalarVolume(m.data.astype(np.float64), m.spacing, m.origin), path, "MET_SHORT")


def read_mask(path, threshold: float = 0.5) -> BinaryMask:
    return binarize_mask(read_volume(path), threshold)


def binarize_mask(v: ScalarVolume, threshold: float) -> BinaryMask:
    return BinaryMask(v.data > threshold, v.spacing, v.origin)


# ---------------------------------------------------------------- resampling

def _resampled_dims(dims, spacing, target) -> tuple[int, int, int]:
    # the epsilon keeps e.g. 10 * 1.5 / 0.75 from rounding up to 21
    return tuple(max(1, math.ceil(n * s / target - 1e-9)) for n, s in zip(dims, spacing))


def _source_coords(dims, spacing, target):
    out_dims = _resampled_dims(dims, spacing, target)
    axes = [np.arange(m) * (target / s) for m, s in zip(out_dims, spacing)]
    return out_dims, axes


def resample_isotropic(v: ScalarVolume, target: float = DEFAULT_SPACING_MM) -> ScalarVolume:
    """Trilinear resampling onto an isotropic grid sharing the input origin.

    Query points beyond the last input voxel center clamp to the edge value.
    """
    if not target > 0:
        raise NonPositiveTarget(f"target spacing must be > 0, got {target}")
    out_dims, axes = _source_coords(v.dims, v.spacing, target)
    if out_dims == v.dims and all(s == target for s in v.spacing):
        return ScalarVolume(v.data, v.spacing, v.origin)
    # trilinear interpolation is separable: interpolate one axis at a time
    data = v.data
    for axis, coords in enumerate(axes):
        n = data.shape[axis]
        c = np.clip(coords, 0, n - 1)
        lo = np.floor(c).astype(np.intp)
        hi = np.minimum(lo + 1, n - 1)
        w = c - lo
        shape = [1, 1, 1]
        shape[axis] = -1
        w = w.reshape(shape)
        data = np.take(data, lo, axis=axis) * (1.0 - w) + np.take(data, hi, axis=axis) * w
    return ScalarVolume(data, (target,) * 3, v.origin)


def resample_mask_nearest(m: BinaryMask, target: float = DEFAULT_SPACING_MM) -> BinaryMask:
    """Nearest-center resampling onto the grid used by :func:`resample_isotropic`.

    Ties (query exactly halfway between two centers) go to the higher index.
    """
    if not target > 0:
        raise NonPositiveTarget(f"target spacing must be > 0, got {target}")
    out_dims, axes = _source_coords(m.dims, m.spacing, target)
    idx = [np.clip(np.floor(c + 0.5).astype(np.intp), 0, n - 1) for c, n in zip(axes, m.dims)]
    data = m.data[np.ix_(*idx)]
    return BinaryMask(data, (target,) * 3, m.origin)
