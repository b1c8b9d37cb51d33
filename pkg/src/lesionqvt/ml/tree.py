"""CART decision trees stored as flat node arrays.

Nodes are numbered in preorder (depth-first, left child first). A leaf has
``feature == -1``. Rows with ``x[feature] <= threshold`` go left.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GINI = "gini"
SSE = "sse"
_EPS = 1e-12


@dataclass(eq=False)
class Tree:
    feature: np.ndarray  # int64, -1 at leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray
    # total impurity decrease of the split at each node (0 at leaves)
    decrease: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        d = np.zeros(self.node_count, dtype=np.int64)
        for i in range(self.node_count):
            if self.feature[i] >= 0:
                d[self.left[i]] = d[self.right[i]] = d[i] + 1
        return int(d.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        active = self.feature[node] >= 0
        while active.any():
            r, nd = rows[active], node[active]
            go_left = X[r, self.feature[nd]] <= self.threshold[nd]
            node[r] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def importance(self, n_features: int) -> np.ndarray:
        """Impurity decrease per feature, weighted by the fraction of root samples at each node."""
        out = np.zeros(n_features)
        split = self.feature >= 0
        np.add.at(out, self.feature[split], self.decrease[split] / self.n_samples[0])
        return out

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "n_samples": self.n_samples.tolist(),
            "decrease": self.decrease.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Tree:
        ints = ("feature", "left", "right", "n_samples")
        return cls(
            **{k: np.asarray(d[k], dtype=np.int64 if k in ints else np.float64) for k in cls.__dataclass_fields__}
        )


def _split_gains(v: np.ndarray, y: np.ndarray, criterion: str, min_leaf: int):
    """Best split per column of ``v`` (rows x candidate features).

    Returns (gain, threshold) arrays; gain is -inf where no split is valid.
    """
    n = len(y)
    order = np.argsort(v, axis=0, kind="stable")
    vs = np.take_along_axis(v, order, axis=0)
    ys = y[order]
    left_sum = np.cumsum(ys, axis=0)[:-1]
    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n_right = n - n_left
    total = float(y.sum())
    right_sum = total - left_sum
    if criterion == GINI:
        parent = 2.0 * total * (n - total) / n
        child = 2.0 * left_sum * (n_left - left_sum) / n_left + 2.0 * right_sum * (n_right - right_sum) / n_right
        gain = parent - child
    else:
        gain = left_sum**2 / n_left + right_sum**2 / n_right - total**2 / n
    valid = (vs[1:] > vs[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    gain = np.where(valid, gain, -np.inf)
    pos = np.argmax(gain, axis=0)  # first maximum: lowest threshold
    cols = np.arange(v.shape[1])
    lo, hi = vs[pos, cols], vs[pos + 1, cols]
    thr = 0.5 * (lo + hi)
    thr = np.where(thr < hi, thr, lo)  # midpoint rounded up onto hi
    return gain[pos, cols], thr


def build_tree(
    X: np.ndarray,
    y: np.ndarray,
    criterion: str,
    *,
    max_depth: int | None = None,
    min_leaf: int = 1,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
) -> Tree:
    """Grow a CART tree depth-first.

    With ``max_features`` set, each node draws a fresh feature permutation
    and scores its first ``max_features`` entries; if none of them splits
    the node, the remaining features are tried in permutation order and the
    first one that does is used. Ties go to the lowest feature index, then
    the lowest threshold. Leaves hold the mean of ``y`` (the class-1
    fraction under Gini).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    if max_features is not None and rng is None:
        raise ValueError("feature subsampling needs an rng")
    feature, threshold, left, right, value, n_samples, decrease = ([] for _ in range(7))

    def new_node(rows: np.ndarray) -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[rows].mean()))
        n_samples.append(len(rows))
        decrease.append(0.0)
        return len(feature) - 1

    def best(rows: np.ndarray, feats: np.ndarray):
        feats = np.sort(feats)
        gains, thrs = _split_gains(X[np.ix_(rows, feats)], y[rows], criterion, min_leaf)
        j = int(np.argmax(gains))
        return gains[j], int(feats[j]), float(thrs[j])

    stack = [(np.arange(n), new_node(np.arange(n)), 0)]
    while stack:
        rows, node, depth = stack.pop()
        yr = y[rows]
        if len(rows) < 2 * min_leaf or (max_depth is not None and depth >= max_depth):
            continue
        if criterion == GINI and (yr.min() == yr.max()):
            continue
        if max_features is None or max_features >= p:
            gain, f, thr = best(rows, np.arange(p))
        else:
            perm = rng.permutation(p)
            gain, f, thr = best(rows, perm[:max_features])
            if not gain > _EPS:
                rest = perm[max_features:]
                gains, thrs = _split_gains(X[np.ix_(rows, rest)], yr, criterion, min_leaf)
                ok = np.flatnonzero(gains > _EPS)
                if ok.size:
                    gain, f, thr = gains[ok[0]], int(rest[ok[0]]), float(thrs[ok[0]])
        if not gain > _EPS:
            continue
        go_left = X[rows, f] <= thr
        lrows, rrows = rows[go_left], rows[~go_left]
        feature[node], threshold[node], decrease[node] = f, thr, float(gain)
        left[node] = new_node(lrows)
        stack_left = (lrows, left[node], depth + 1)
        right[node] = new_node(rrows)
        # right pushed first so the left subtree is grown (and numbered) first
        stack.append((rrows, right[node], depth + 1))
        stack.append(stack_left)

    return Tree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        value=np.asarray(value),
        n_samples=np.asarray(n_samples, dtype=np.int64),
        decrease=np.asarray(decrease),
    )
