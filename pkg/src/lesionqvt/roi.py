"""Mask morphology: distance maps, metric dilation, boundary bands, labelling, RECIST."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage as ndi

from .errors import EmptyLesion, EmptyMask, NegativeMargin, NoFollowups, ZeroBaselineDiameter
from .volume import BinaryMask

SHRINK_FRACTION = 0.30
_REL_TOL = 1e-9

_STRUCTURES = {6: 1, 18: 2, 26: 3}


def structure(connectivity: int) -> np.ndarray:
    if connectivity not in _STRUCTURES:
        raise ValueError(f"connectivity must be 6, 18 or 26, got {connectivity}")
    return ndi.generate_binary_structure(3, _STRUCTURES[connectivity])


def distance_map(m: BinaryMask) -> np.ndarray:
    """Exact Euclidean distance (mm) from every voxel center to the nearest foreground center."""
    if not m.data.any():
        raise EmptyMask("distance to an empty mask is undefined")
    _, nearest = ndi.distance_transform_edt(~m.data, sampling=m.spacing, return_indices=True)
    # recompute from integer offsets so the value does not depend on scipy's rounding order
    offsets = (nearest - np.indices(m.dims)).astype(float) * np.asarray(m.spacing)[:, None, None, None]
    return np.sqrt((offsets**2).sum(axis=0))


def dilate_mask(m: BinaryMask, margin: float) -> BinaryMask:
    if margin < 0:
        raise NegativeMargin(f"margin must be >= 0, got {margin}")
    if margin == 0 or not m.data.any():
        return m
    # voxels farther than the margin from the bounding box cannot be reached, so work on a crop
    reach = np.ceil(margin / np.asarray(m.spacing)).astype(int) + 1
    idx = np.argwhere(m.data)
    lo = np.maximum(idx.min(axis=0) - reach, 0)
    hi = np.minimum(idx.max(axis=0) + reach + 1, m.dims)
    box = tuple(slice(a, b) for a, b in zip(lo, hi))
    out = np.zeros(m.dims, dtype=bool)
    out[box] = distance_map(BinaryMask(m.data[box], m.spacing)) <= margin * (1 + _REL_TOL)
    return m.with_data(out)


def erode_mask(m: BinaryMask, margin: float) -> BinaryMask:
    if margin < 0:
        raise NegativeMargin(f"margin must be >= 0, got {margin}")
    if margin == 0 or m.data.all():
        return m
    d = ndi.distance_transform_edt(m.data, sampling=m.spacing)
    return m.with_data(d > margin * (1 + _REL_TOL))


def boundary_band(m: BinaryMask, margin: float = 2.0, mode: str = "outer") -> BinaryMask:
    """Peritumoral ROI: ``outer`` = dilation minus lesion, ``symmetric`` adds the inner rim."""
    if not margin > 0:
        raise NegativeMargin(f"band margin must be > 0, got {margin}")
    if not m.data.any():
        raise EmptyLesion("boundary band of an empty lesion")
    outer = dilate_mask(m, margin).data & ~m.data
    if mode == "outer":
        return m.with_data(outer)
    if mode == "symmetric":
        return m.with_data(outer | (m.data & ~erode_mask(m, margin).data))
    raise ValueError(f"unknown band mode {mode!r}")


@dataclass(frozen=True)
class LabeledComponents:
    labels: np.ndarray
    sizes: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.sizes)


def connected_components(m: BinaryMask | np.ndarray, connectivity: int = 26) -> LabeledComponents:
    """Label components; ids are ordered by each component's smallest x-fastest linear index."""
    data = m.data if isinstance(m, BinaryMask) else np.asarray(m, dtype=bool)
    labels, k = ndi.label(data, structure=structure(connectivity))
    if k == 0:
        return LabeledComponents(labels, ())
    nx, ny, _ = data.shape
    x, y, z = np.nonzero(labels)
    lin = x + nx * (y + ny * z)
    lab = labels[x, y, z]
    first = np.full(k + 1, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(first, lab, lin)
    order = np.argsort(first[1:], kind="stable")
    remap = np.zeros(k + 1, dtype=labels.dtype)
    remap[order + 1] = np.arange(1, k + 1)
    labels = remap[labels]
    sizes = np.bincount(labels.ravel(), minlength=k + 1)[1:]
    return LabeledComponents(labels, tuple(int(s) for s in sizes))


def _slice_extent(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    best = 0.0
    # chunked all-pairs so memory stays bounded on large slices
    for start in range(0, len(points), 512):
        chunk = points[start : start + 512]
        d2 = ((chunk[:, None, :] - points[None, :, :]) ** 2).sum(-1)
        best = max(best, float(d2.max()))
    return float(np.sqrt(best))


def recist_diameter(m: BinaryMask) -> float:
    """Longest in-plane (axial) distance in mm between foreground voxel centers."""
    sx, sy, _ = m.spacing
    best = 0.0
    four = ndi.generate_binary_structure(2, 1)
    for z in np.flatnonzero(m.data.any(axis=(0, 1))):
        sl = m.data[:, :, z]
        # extreme points lie on the slice boundary, so interior pixels can be skipped
        edge = sl & ~ndi.binary_erosion(sl, four, border_value=0)
        ix, iy = np.nonzero(edge)
        pts = np.column_stack([ix * sx, iy * sy])
        best = max(best, _slice_extent(pts))
    return best


@dataclass(frozen=True)
class DiameterRecord:
    lesion_id: str
    timepoint: int
    diameter_mm: float


def shrinkage_label(baseline: DiameterRecord, followups) -> int:
    """1 when any follow-up diameter is at least 30% below baseline (boundary inclusive)."""
    followups = list(followups)
    if not followups:
        raise NoFollowups(f"lesion {baseline.lesion_id} has no follow-up diameters")
    if not baseline.diameter_mm > 0:
        raise ZeroBaselineDiameter(f"lesion {baseline.lesion_id} has baseline diameter 0")
    smallest = min(f.diameter_mm for f in followups)
    shrink = (baseline.diameter_mm - smallest) / baseline.diameter_mm
    return int(shrink >= SHRINK_FRACTION - _REL_TOL)
