"""Random forest and gradient boosting built on :mod:`.tree`, plus JSON persistence."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..errors import CorruptModelFile, SingleClassDataset, VersionMismatch, WidthMismatch
from .dataset import Dataset
from .tree import GINI, SSE, Tree, build_tree

FORMAT_VERSION = 1


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 300
    max_features: int | None = None  # None: ceil(sqrt(n_cols))
    min_leaf: int = 2
    max_depth: int | None = None
    bootstrap: bool = True


@dataclass(frozen=True)
class BoostingParams:
    n_stages: int = 200
    learning_rate: float = 0.1
    max_depth: int = 3
    min_leaf: int = 1


@dataclass(eq=False)
class ForestModel:
    trees: list[Tree]
    feature_ids: tuple[str, ...]
    params: ForestParams = field(default_factory=ForestParams)
    seed: int = 0

    kind = "rf"

    def predict_proba(self, X) -> np.ndarray:
        X = _check_width(X, len(self.feature_ids))
        if not self.trees:
            raise ValueError("forest has no trees")
        return np.mean([t.predict(X) for t in self.trees], axis=0)


@dataclass(eq=False)
class GbModel:
    trees: list[Tree]
    feature_ids: tuple[str, ...]
    init_score: float
    params: BoostingParams = field(default_factory=BoostingParams)
    seed: int = 0

    kind = "gb"

    def decision_function(self, X) -> np.ndarray:
        X = _check_width(X, len(self.feature_ids))
        score = np.full(len(X), self.init_score)
        for t in self.trees:
            score += self.params.learning_rate * t.predict(X)
        return score

    def predict_proba(self, X) -> np.ndarray:
        return _sigmoid(self.decision_function(X))


Model = ForestModel | GbModel


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _check_width(X, width: int) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != width:
        raise WidthMismatch(f"model expects {width} features, rows have {X.shape[1]}")
    return X


def _check_classes(d: Dataset) -> None:
    if d.n_rows < 2 or d.labels.min() == d.labels.max():
        raise SingleClassDataset("training needs at least 2 rows and both classes")


def _canonical_order(d: Dataset) -> np.ndarray:
    """Columns sorted by feature id.

    Trees are grown on this order so tie-breaking and feature sampling do not
    depend on how the caller arranged the columns.
    """
    return np.array(sorted(range(d.n_cols), key=lambda j: d.feature_ids[j]), dtype=np.int64)


def _to_caller_columns(t: Tree, order: np.ndarray) -> Tree:
    split = t.feature >= 0
    t.feature[split] = order[t.feature[split]]
    return t


def tree_seed(seed: int, index: int) -> np.random.Generator:
    """Independent stream for tree ``index``: results never depend on training order."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def train_random_forest(d: Dataset, params: ForestParams = ForestParams(), seed: int = 0) -> ForestModel:
    _check_classes(d)
    n, p = d.features.shape
    mtry = params.max_features or math.ceil(math.sqrt(p))
    order = _canonical_order(d)
    X = d.features[:, order]
    y = d.labels.astype(np.float64)
    trees = []
    for i in range(params.n_trees):
        rng = tree_seed(seed, i)
        rows = rng.integers(0, n, n) if params.bootstrap else np.arange(n)
        t = build_tree(
            X[rows],
            y[rows],
            GINI,
            max_depth=params.max_depth,
            min_leaf=params.min_leaf,
            max_features=mtry,
            rng=rng,
        )
        trees.append(_to_caller_columns(t, order))
    return ForestModel(trees, d.feature_ids, params, seed)


def logistic_loss(y: np.ndarray, score: np.ndarray) -> float:
    return float(np.mean(np.logaddexp(0.0, score) - y * score))


def train_gradient_boosting(d: Dataset, params: BoostingParams = BoostingParams(), seed: int = 0) -> GbModel:
    """Logistic-loss boosting; each stage fits a regression tree to ``y - sigmoid(score)``.

    Every stage sees all rows and all features, so the fit is deterministic and
    ``seed`` is only recorded.
    """
    _check_classes(d)
    y = d.labels.astype(np.float64)
    base = y.mean()
    init = float(np.log(base / (1.0 - base)))
    score = np.full(len(y), init)
    order = _canonical_order(d)
    X = d.features[:, order]
    trees = []
    for _ in range(params.n_stages):
        residual = y - _sigmoid(score)
        t = build_tree(X, residual, SSE, max_depth=params.max_depth, min_leaf=params.min_leaf)
        score += params.learning_rate * t.predict(X)
        trees.append(_to_caller_columns(t, order))
    return GbModel(trees, d.feature_ids, init, params, seed)


def train(kind: str, d: Dataset, params=None, seed: int = 0) -> Model:
    if kind == "rf":
        return train_random_forest(d, params or ForestParams(), seed)
    if kind == "gb":
        return train_gradient_boosting(d, params or BoostingParams(), seed)
    raise ValueError(f"unknown model kind {kind!r}")


def predict_proba(model: Model, rows) -> np.ndarray:
    return model.predict_proba(rows)


def importance_weights(model: Model) -> np.ndarray:
    """Normalized impurity-decrease importance per feature column.

    Forest trees are normalized individually before averaging; boosting
    stages are summed raw. A model without any split spreads weight evenly.
    """
    p = len(model.feature_ids)
    if isinstance(model, ForestModel):
        total = np.zeros(p)
        for t in model.trees:
            w = t.importance(p)
            if w.sum() > 0:
                total += w / w.sum()
    else:
        total = np.sum([t.importance(p) for t in model.trees], axis=0) if model.trees else np.zeros(p)
    s = total.sum()
    return total / s if s > 0 else np.full(p, 1.0 / p)


def rank_importance(weights: np.ndarray, feature_ids) -> list[tuple[str, float]]:
    order = sorted(range(len(weights)), key=lambda j: (-weights[j], j))
    return [(feature_ids[j], float(weights[j])) for j in order]


def feature_importance(model: Model) -> list[tuple[str, float]]:
    """(feature_id, weight) pairs, heaviest first, ties by column index."""
    return rank_importance(importance_weights(model), model.feature_ids)


def model_to_dict(model: Model) -> dict:
    out = {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "feature_ids": list(model.feature_ids),
        "params": asdict(model.params),
        "seed": model.seed,
        "trees": [t.to_dict() for t in model.trees],
    }
    if isinstance(model, GbModel):
        out["init_score"] = model.init_score
    return out


def model_from_dict(d: dict) -> Model:
    version = d.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"model format version {version!r}, expected {FORMAT_VERSION}")
    try:
        trees = [Tree.from_dict(t) for t in d["trees"]]
        ids = tuple(d["feature_ids"])
        p = len(ids)
        for t in trees:
            if (t.feature >= p).any() or len({len(a) for a in t.to_dict().values()}) != 1:
                raise ValueError("inconsistent tree arrays")
        if d["kind"] == "rf":
            return ForestModel(trees, ids, ForestParams(**d["params"]), int(d["seed"]))
        if d["kind"] == "gb":
            return GbModel(trees, ids, float(d["init_score"]), BoostingParams(**d["params"]), int(d["seed"]))
        raise ValueError(f"unknown model kind {d['kind']!r}")
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptModelFile(f"malformed model: {e}") from e


def save_model(model: Model, path) -> None:
    text = json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":"))
    Path(path).write_text(text + "\n")


def load_model(path) -> Model:
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CorruptModelFile(f"cannot read model file {path}: {e}") from e
    if not isinstance(d, dict):
        raise CorruptModelFile(f"{path} does not hold a model object")
    return model_from_dict(d)
