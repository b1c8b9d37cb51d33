from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyRoi, NonPositiveBinWidth
from ..volume import BinaryMask, ScalarVolume, check_geometry

DEFAULT_BIN_WIDTH = 25.0


@dataclass(frozen=True, eq=False)
class GrayLevelVolume:
    """Discretized ROI, cropped to the ROI bounding box.

    ``levels`` is 0 outside the ROI and 1..ng inside.
    """

    levels: np.ndarray
    ng: int
    bin_width: float
    roi_min: float

    @property
    def roi(self) -> np.ndarray:
        return self.levels > 0

    @property
    def voxel_count(self) -> int:
        return int(np.count_nonzero(self.levels))


def roi_bbox(mask: np.ndarray) -> tuple[slice, slice, slice]:
    idx = np.nonzero(mask)
    return tuple(slice(int(i.min()), int(i.max()) + 1) for i in idx)


def bin_values(x: np.ndarray, roi_min: float, bin_width: float) -> np.ndarray:
    return np.floor((x - roi_min) / bin_width).astype(np.int64) + 1


def discretize(v: ScalarVolume, roi: BinaryMask, bin_width: float = DEFAULT_BIN_WIDTH) -> GrayLevelVolume:
    if not bin_width > 0:
        raise NonPositiveBinWidth(f"bin width must be > 0, got {bin_width}")
    check_geometry(v, roi)
    if not roi.data.any():
        raise EmptyRoi("cannot discretize an empty ROI")
    box = roi_bbox(roi.data)
    inside = roi.data[box]
    x = v.data[box]
    roi_min = float(x[inside].min())
    levels = np.zeros(inside.shape, dtype=np.int64)
    levels[inside] = bin_values(x[inside], roi_min, bin_width)
    return GrayLevelVolume(levels, int(levels.max()), float(bin_width), roi_min)


def from_levels(levels: np.ndarray, bin_width: float = 1.0, roi_min: float = 0.0) -> GrayLevelVolume:
    """Wrap an already-discretized integer grid (0 = outside)."""
    levels = np.asarray(levels, dtype=np.int64)
    if levels.ndim == 2:
        levels = levels[:, :, None]
    if levels.min() < 0 or not levels.any():
        raise EmptyRoi("level grid needs at least one positive level and none negative")
    return GrayLevelVolume(levels, int(levels.max()), bin_width, roi_min)
