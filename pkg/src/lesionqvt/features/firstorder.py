from __future__ import annotations

import numpy as np

from ..errors import EmptyRoi
from ..volume import BinaryMask, ScalarVolume, check_geometry
from .discretize import DEFAULT_BIN_WIDTH, bin_values

FIRSTORDER_NAMES = (
    "Minimum", "Maximum", "Mean", "Median", "Range", "Variance", "Skewness", "Kurtosis",
    "MeanAbsoluteDeviation", "RobustMeanAbsoluteDeviation", "RootMeanSquared",
    "Percentile10", "Percentile90", "InterquartileRange", "Entropy", "Uniformity",
)


def first_order_values(x: np.ndarray, bin_width: float = DEFAULT_BIN_WIDTH) -> dict[str, float]:
    """The 16 intensity statistics of a 1-D sample of HU values.

    Kurtosis is the plain fourth standardized moment (3 for a Gaussian);
    Skewness and Kurtosis of a constant sample are 0, as is the robust MAD
    when no value falls inside [P10, P90].
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise EmptyRoi("first-order statistics of an empty ROI")
    mean = x.mean()
    dev = x - mean
    m2 = float((dev**2).mean())
    m3 = float((dev**3).mean())
    m4 = float((dev**4).mean())
    p10, p25, p75, p90 = np.percentile(x, [10, 25, 75, 90])
    robust = x[(x >= p10) & (x <= p90)]
    levels = bin_values(x, x.min(), bin_width)
    hist = np.bincount(levels)[1:] / x.size
    hist = hist[hist > 0]
    return {
        "Minimum": float(x.min()),
        "Maximum": float(x.max()),
        "Mean": float(mean),
        "Median": float(np.median(x)),
        "Range": float(x.max() - x.min()),
        "Variance": m2,
        "Skewness": m3 / m2**1.5 if m2 > 0 else 0.0,
        "Kurtosis": m4 / m2**2 if m2 > 0 else 0.0,
        "MeanAbsoluteDeviation": float(np.abs(dev).mean()),
        # two-value ROIs leave the [P10, P90] window empty
        "RobustMeanAbsoluteDeviation": float(np.abs(robust - robust.mean()).mean()) if robust.size else 0.0,
        "RootMeanSquared": float(np.sqrt((x**2).mean())),
        "Percentile10": float(p10),
        "Percentile90": float(p90),
        "InterquartileRange": float(p75 - p25),
        "Entropy": float(-(hist * np.log2(hist)).sum()),
        "Uniformity": float((hist**2).sum()),
    }


def first_order_features(
    v: ScalarVolume, roi: BinaryMask, bin_width: float = DEFAULT_BIN_WIDTH
) -> dict[str, float]:
    check_geometry(v, roi)
    if not roi.data.any():
        raise EmptyRoi("first-order statistics of an empty ROI")
    vals = first_order_values(v.data[roi.data], bin_width)
    return {f"firstorder_{k}": vals[k] for k in FIRSTORDER_NAMES}
