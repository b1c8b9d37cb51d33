"""Lung and vessel masks, and retention of the vessel trees touching a lesion."""
from __future__ import annotations

import numpy as np
from scipy import ndimage as ndi

from ..errors import EmptyLung, NoLungFound
from ..roi import connected_components, structure
from ..volume import BinaryMask, ScalarVolume, check_geometry

LUNG_THRESHOLD_HU = -320.0
LUNG_CLOSING_RADIUS = 2


def ball(radius: int) -> np.ndarray:
    r = int(radius)
    x, y, z = np.mgrid[-r : r + 1, -r : r + 1, -r : r + 1]
    return x * x + y * y + z * z <= r * r


def lung_mask_threshold(
    v: ScalarVolume,
    threshold: float = LUNG_THRESHOLD_HU,
    closing_radius: int = LUNG_CLOSING_RADIUS,
) -> BinaryMask:
    """Threshold-based lung extraction.

    Low-density voxels are labelled, components touching the volume border
    (outside air) are dropped, the two largest survivors are kept, then
    closed and hole-filled so enclosed vessels and nodules count as lung.
    """
    low = v.data < threshold
    comps = connected_components(low, 26)
    lab = comps.labels
    border = np.zeros(lab.shape, dtype=bool)
    border[[0, -1], :, :] = border[:, [0, -1], :] = border[:, :, [0, -1]] = True
    touching = set(np.unique(lab[border]).tolist()) - {0}
    candidates = [(size, -k) for k, size in enumerate(comps.sizes, start=1) if k not in touching]
    if not candidates:
        raise NoLungFound("no enclosed low-density component")
    keep = [-neg for _, neg in sorted(candidates, reverse=True)[:2]]
    lung = np.isin(lab, keep)
    if closing_radius > 0:
        r = int(closing_radius)
        padded = np.pad(lung, r)
        padded = ndi.binary_closing(padded, structure=ball(r))
        lung = padded[r:-r, r:-r, r:-r]
    lung = ndi.binary_fill_holes(lung)
    return BinaryMask(lung, v.spacing, v.origin)


def otsu_threshold(values: np.ndarray, bins: int = 1024) -> float | None:
    """Histogram Otsu threshold; ``None`` when the between-class variance is 0 everywhere."""
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        return None
    hist, edges = np.histogram(values, bins=bins, range=(lo, hi))
    centers = 0.5 * (edges[:-1] + edges[1:])
    w0 = np.cumsum(hist)[:-1].astype(np.float64)
    w1 = values.size - w0
    s0 = np.cumsum(hist * centers)[:-1]
    m0 = np.divide(s0, w0, out=np.zeros_like(s0), where=w0 > 0)
    m1 = np.divide(s0[-1] + hist[-1] * centers[-1] - s0, w1, out=np.zeros_like(s0), where=w1 > 0)
    between = w0 * w1 * (m0 - m1) ** 2
    k = int(np.argmax(between))
    if between[k] <= 0:
        return None
    return float(edges[k + 1])


def segment_vessels(
    v: ScalarVolume, lung: BinaryMask, mode: str = "otsu", threshold: float | None = None
) -> BinaryMask:
    """Lung voxels at or above an Otsu (``mode="otsu"``) or fixed HU threshold."""
    check_geometry(v, lung)
    if not lung.data.any():
        raise EmptyLung("vessel segmentation needs a nonempty lung mask")
    if mode == "otsu":
        t = otsu_threshold(v.data[lung.data])
        if t is None:
            return lung.with_data(np.zeros(lung.dims, dtype=bool))
    elif mode == "fixed":
        if threshold is None:
            raise ValueError("fixed mode needs a threshold")
        t = float(threshold)
    else:
        raise ValueError(f"unknown vessel threshold mode {mode!r}")
    return lung.with_data(lung.data & (v.data >= t))


def lesion_attached_tree(vessels: BinaryMask, lesion: BinaryMask) -> BinaryMask:
    """Vessel components (26-connected, lesion voxels removed) touching or entering the lesion."""
    check_geometry(vessels, lesion)
    cand = vessels.data & ~lesion.data
    if not cand.any() or not lesion.data.any():
        return vessels.with_data(np.zeros(vessels.dims, dtype=bool))
    lab, _ = ndi.label(cand, structure=structure(26))
    shell = ndi.binary_dilation(lesion.data, structure=structure(26))
    keep = np.unique(lab[shell & cand])
    return vessels.with_data(np.isin(lab, keep[keep > 0]))
