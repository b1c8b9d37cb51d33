from __future__ import annotations

import numpy as np

from ..errors import ZeroChord
from ..features.discretize import roi_bbox
from ..volume import BinaryMask
from .geometry import DEFAULT_CURVATURE_WINDOW, branch_tortuosity, curvature_profile, total_curvature
from .skeleton import SkeletonGraph

MEASURES = (
    "Tortuosity", "CurvMean", "CurvMax", "CurvStd", "TotalCurvature",
    "GeodesicLength", "ChordLength", "VoxelCount",
)
STATS = ("Mean", "Std", "Skew", "Kurt")
QVT_IDS: tuple[str, ...] = tuple(f"qvt_{m}_{s}" for m in MEASURES for s in STATS) + (
    "qvt_BranchCount",
    "qvt_FillFraction",
)
FRACTAL_LEVELS = 10
FRACTAL_IDS: tuple[str, ...] = tuple(f"fractal_FD_r{2 ** k}" for k in range(1, FRACTAL_LEVELS + 1))


def summary_stats(values) -> tuple[float, float, float, float]:
    """Mean, population std, skewness, kurtosis (normal = 3); spread terms are 0 below 2 values."""
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        return 0.0, 0.0, 0.0, 0.0
    mean = float(x.mean())
    if x.size < 2:
        return mean, 0.0, 0.0, 0.0
    dev = x - mean
    m2 = float((dev**2).mean())
    if m2 <= 0:
        return mean, 0.0, 0.0, 0.0
    return mean, float(np.sqrt(m2)), float((dev**3).mean() / m2**1.5), float((dev**4).mean() / m2**2)


def branch_measures(graph: SkeletonGraph, window: int = DEFAULT_CURVATURE_WINDOW) -> dict[str, list[float]]:
    out = {m: [] for m in MEASURES}
    for b in graph.branches:
        try:
            out["Tortuosity"].append(branch_tortuosity(b))
        except ZeroChord:
            pass  # closed loops have no finite tortuosity
        k = curvature_profile(b, window)
        if k.size:
            out["CurvMean"].append(float(k.mean()))
            out["CurvMax"].append(float(k.max()))
            out["CurvStd"].append(float(k.std()))
            out["TotalCurvature"].append(total_curvature(b, window))
        out["GeodesicLength"].append(b.geodesic_mm)
        out["ChordLength"].append(b.chord_mm)
        out["VoxelCount"].append(float(b.voxel_count))
    return out


def fill_fraction(vessels: BinaryMask) -> float:
    if not vessels.data.any():
        return 0.0
    box = roi_bbox(vessels.data)
    return vessels.count / float(np.prod([s.stop - s.start for s in box]))


def qvt_features(
    graph: SkeletonGraph, vessels: BinaryMask, window: int = DEFAULT_CURVATURE_WINDOW
) -> dict[str, float]:
    """34 tree descriptors: 8 per-branch measures x 4 statistics, branch count, fill fraction."""
    if not graph.branches:
        out = dict.fromkeys(QVT_IDS, 0.0)
        out["qvt_FillFraction"] = fill_fraction(vessels)
        return out
    measures = branch_measures(graph, window)
    out = {}
    for m in MEASURES:
        for s, value in zip(STATS, summary_stats(measures[m])):
            out[f"qvt_{m}_{s}"] = value
    out["qvt_BranchCount"] = float(len(graph.branches))
    out["qvt_FillFraction"] = fill_fraction(vessels)
    return out


def box_counts(mask: np.ndarray, levels: int = FRACTAL_LEVELS) -> list[int]:
    """Occupied-box counts N(2^0) .. N(2^levels), boxes anchored at index (0, 0, 0)."""
    cur = np.asarray(mask, dtype=bool)
    counts = [int(np.count_nonzero(cur))]
    for _ in range(levels):
        pad = [(0, s % 2) for s in cur.shape]
        if any(p for _, p in pad):
            cur = np.pad(cur, pad)
        nx, ny, nz = cur.shape
        cur = cur.reshape(nx // 2, 2, ny // 2, 2, nz // 2, 2).any(axis=(1, 3, 5))
        counts.append(int(np.count_nonzero(cur)))
    return counts


def fractal_dimensions(vessels: BinaryMask | np.ndarray) -> dict[str, float]:
    """Local box-counting dimension between box sizes 2^(k-1) and 2^k, k = 1..10."""
    data = vessels.data if isinstance(vessels, BinaryMask) else vessels
    n = box_counts(data)
    out = {}
    for k, fid in enumerate(FRACTAL_IDS, start=1):
        if n[k - 1] == 0:
            out[fid] = 0.0
        else:
            # log2 of the ratio stays exact for powers of two and never exceeds 3
            out[fid] = float(np.log2(n[k - 1] / n[k]))
    return out
