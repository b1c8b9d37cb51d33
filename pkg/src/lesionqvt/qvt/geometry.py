from __future__ import annotations

import numpy as np

from ..errors import ZeroChord
from .skeleton import Branch

DEFAULT_CURVATURE_WINDOW = 2


def menger_curvature(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Curvature (1/mm) of the circle through each triple of points; 0 when collinear."""
    ab = np.linalg.norm(b - a, axis=-1)
    bc = np.linalg.norm(c - b, axis=-1)
    ca = np.linalg.norm(a - c, axis=-1)
    twice_area = np.linalg.norm(np.cross(b - a, c - a), axis=-1)
    den = ab * bc * ca
    return np.divide(2.0 * twice_area, den, out=np.zeros_like(den), where=den > 0)


def curve_curvature(points: np.ndarray, window: int = DEFAULT_CURVATURE_WINDOW) -> np.ndarray:
    if window < 1:
        raise ValueError(f"curvature window must be >= 1, got {window}")
    points = np.asarray(points, dtype=np.float64)
    if len(points) < 2 * window + 1:
        return np.zeros(0)
    w = window
    return menger_curvature(points[: -2 * w], points[w:-w], points[2 * w :])


def curvature_profile(b: Branch, window: int = DEFAULT_CURVATURE_WINDOW) -> np.ndarray:
    return curve_curvature(b.curve, window)


def total_curvature(b: Branch, window: int = DEFAULT_CURVATURE_WINDOW) -> float:
    """Sum of |curvature| times the local arc element over the profiled points."""
    k = curvature_profile(b, window)
    if k.size == 0:
        return 0.0
    steps = np.linalg.norm(np.diff(b.curve, axis=0), axis=1)
    ds = 0.5 * (steps[:-1] + steps[1:])
    return float((k * ds[window - 1 : window - 1 + k.size]).sum())


def path_tortuosity(points: np.ndarray) -> float:
    points = np.asarray(points, dtype=np.float64)
    chord = float(np.linalg.norm(points[-1] - points[0]))
    if chord == 0:
        raise ZeroChord("closed curve has no chord")
    return float(np.linalg.norm(np.diff(points, axis=0), axis=1).sum()) / chord


def branch_tortuosity(b: Branch) -> float:
    """Geodesic length over chord length (>= 1)."""
    return path_tortuosity(b.curve)
