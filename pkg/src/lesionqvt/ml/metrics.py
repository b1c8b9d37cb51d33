from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from ..errors import SingleClassLabels


def _check(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(np.int64)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1D and equally long")
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == len(y):
        raise SingleClassLabels("AUC needs both classes")
    return s, y


def roc_auc(scores, labels) -> float:
    """Mann-Whitney U over n_pos * n_neg; tied pairs count one half."""
    s, y = _check(scores, labels)
    ranks = rankdata(s)  # average ranks give ties half credit
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def roc_curve(scores, labels) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """ROC points (fpr, tpr, threshold), one per distinct score, from (0, 0) at +inf.

    A row is called positive when its score is >= threshold.
    """
    s, y = _check(scores, labels)
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    last = np.r_[np.flatnonzero(np.diff(s) != 0), len(s) - 1]
    tp = np.cumsum(y)[last]
    fp = (last + 1) - tp
    fpr = np.r_[0.0, fp / (len(y) - y.sum())]
    tpr = np.r_[0.0, tp / y.sum()]
    return fpr, tpr, np.r_[np.inf, s[last]]
