import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import roc_auc_score

from lesionqvt import ml
from lesionqvt.errors import (
    CorruptModelFile,
    FoldClassCollapse,
    SingleClassDataset,
    SingleClassLabels,
    VersionMismatch,
    WidthMismatch,
)
from lesionqvt.ml.tree import Tree

FAST_RF = ml.ForestParams(n_trees=40)
FAST_GB = ml.BoostingParams(n_stages=60)


def dataset(X, y, patients=None):
    n, p = X.shape
    patients = patients or [f"P{i:03d}" for i in range(n)]
    return ml.Dataset(X, tuple(f"f{j}" for j in range(p)), y, patients, tuple(f"L{i:03d}" for i in range(n)))


def gaussians(rng, n=200):
    y = np.arange(n) % 2
    X = rng.normal(size=(n, 2))
    X[:, 0] += np.where(y == 1, 2.0, -2.0)
    return dataset(X, y)


def planted(rng, n=300):
    X = rng.normal(size=(n, 20))
    y = (X[:, 7] > 0).astype(int)
    flip = rng.random(n) < 0.05
    return dataset(X, np.where(flip, 1 - y, y))


# ---------------------------------------------------------------- AUC

def test_auc_hand_cases():
    assert ml.roc_auc([0.9, 0.8, 0.3, 0.2], [1, 1, 0, 0]) == 1.0
    assert ml.roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
    assert ml.roc_auc([0.5] * 6, [0, 1, 0, 1, 1, 0]) == 0.5
    with pytest.raises(SingleClassLabels):
        ml.roc_auc([0.1, 0.2], [1, 1])


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 60))
def test_auc_matches_sklearn_and_monotone_invariance(seed, n):
    r = np.random.default_rng(seed)
    y = r.integers(0, 2, n)
    y[0], y[1] = 0, 1
    s = np.round(r.normal(size=n), 1)  # rounding forces ties
    auc = ml.roc_auc(s, y)
    assert auc == pytest.approx(roc_auc_score(y, s), abs=1e-12)
    assert ml.roc_auc(np.exp(3 * s) + 7, y) == pytest.approx(auc, abs=1e-12)
    assert ml.roc_auc(np.arctan(s), y) == pytest.approx(auc, abs=1e-12)
    fpr, tpr, thr = ml.roc_curve(s, y)
    assert (fpr[0], tpr[0], thr[0]) == (0.0, 0.0, np.inf)
    assert (fpr[-1], tpr[-1]) == (1.0, 1.0)
    assert np.trapezoid(tpr, fpr) == pytest.approx(auc, abs=1e-12)


# ---------------------------------------------------------------- models

def test_rf_separable_and_deterministic(rng, tmp_path):
    y = np.arange(60) % 2
    d = dataset((y + 0.01 * rng.normal(size=60))[:, None], y)
    m = ml.train_random_forest(d, FAST_RF, seed=3)
    assert np.all((m.predict_proba(d.features) > 0.5) == y)
    ml.save_model(m, tmp_path / "a.json")
    ml.save_model(ml.train_random_forest(d, FAST_RF, seed=3), tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert ml.feature_importance(m) == [("f0", 1.0)]


def test_rf_defaults_and_structure(rng):
    d = planted(rng, 120)
    m = ml.train_random_forest(d, ml.ForestParams(n_trees=5, max_depth=3), seed=1)
    assert len(m.trees) == 5
    for t in m.trees:
        assert t.depth <= 3
        assert np.all(t.feature < d.n_cols)
    assert ml.ForestParams().n_trees == 300 and ml.ForestParams().min_leaf == 2
    assert ml.BoostingParams() == ml.BoostingParams(200, 0.1, 3, 1)


def test_single_class_rejected(rng):
    d = dataset(rng.normal(size=(10, 2)), np.ones(10, int))
    with pytest.raises(SingleClassDataset):
        ml.train_random_forest(d, FAST_RF)
    with pytest.raises(SingleClassDataset):
        ml.train_gradient_boosting(d, FAST_GB)


def test_gb_gaussians_held_out(rng):
    train, test = gaussians(rng), gaussians(rng)
    m = ml.train_gradient_boosting(train)
    assert ml.roc_auc(m.predict_proba(test.features), test.labels) >= 0.95


def test_gb_base_rate_and_zero_stages(rng):
    y = np.array([1, 0, 0, 0] * 5)
    d = dataset(rng.normal(size=(20, 3)), y)
    m = ml.train_gradient_boosting(d, ml.BoostingParams(n_stages=1, learning_rate=0.0))
    assert np.allclose(m.predict_proba(rng.normal(size=(7, 3))), 0.25, atol=1e-15)
    z = ml.GbModel([], d.feature_ids, 0.0, ml.BoostingParams(n_stages=0))
    assert np.all(z.predict_proba(np.zeros((3, 3))) == 0.5)


def test_trivial_forest_leaf():
    leaf = Tree(*(np.array([v]) for v in (-1, 0.0, -1, -1, 0.25, 4, 0.0)))
    m = ml.ForestModel([leaf], ("a", "b"))
    assert np.all(m.predict_proba(np.random.default_rng(0).normal(size=(5, 2))) == 0.25)


def test_gb_loss_non_increasing(rng):
    d = planted(rng, 150)
    m = ml.train_gradient_boosting(d, FAST_GB)
    y = d.labels.astype(float)
    score = np.full(d.n_rows, m.init_score)
    losses = [ml.logistic_loss(y, score)]
    for t in m.trees:
        score = score + m.params.learning_rate * t.predict(d.features)
        losses.append(ml.logistic_loss(y, score))
    assert np.all(np.diff(losses) <= 1e-12)


@pytest.mark.parametrize("kind", ["rf", "gb"])
def test_probabilities_in_range_and_width(kind, rng):
    d = planted(rng, 100)
    m = ml.train(kind, d, FAST_RF if kind == "rf" else FAST_GB, seed=2)
    p = m.predict_proba(rng.normal(0, 50, size=(200, 20)))
    assert np.all((p >= 0) & (p <= 1))
    with pytest.raises(WidthMismatch):
        m.predict_proba(np.zeros((2, 19)))


@pytest.mark.parametrize("kind", ["rf", "gb"])
def test_planted_feature_ranks_first(kind, rng):
    d = planted(rng)
    m = ml.train(kind, d, FAST_RF if kind == "rf" else FAST_GB, seed=5)
    ranked = ml.feature_importance(m)
    assert ranked[0][0] == "f7"
    assert sum(w for _, w in ranked) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("kind", ["rf", "gb"])
def test_column_permutation_invariance(kind, rng):
    d = planted(rng, 120)
    perm = rng.permutation(d.n_cols)
    dp = ml.Dataset(d.features[:, perm], tuple(d.feature_ids[j] for j in perm), d.labels, d.patient_ids, d.lesion_ids)
    params = FAST_RF if kind == "rf" else FAST_GB
    a = ml.train(kind, d, params, seed=4)
    b = ml.train(kind, dp, params, seed=4)
    X = rng.normal(size=(50, 20))
    assert np.allclose(a.predict_proba(X), b.predict_proba(X[:, perm]), atol=1e-12)


@pytest.mark.parametrize("kind", ["rf", "gb"])
def test_save_load_round_trip(kind, rng, tmp_path):
    d = planted(rng, 80)
    m = ml.train(kind, d, FAST_RF if kind == "rf" else FAST_GB, seed=9)
    path = tmp_path / "m.json"
    ml.save_model(m, path)
    back = ml.load_model(path)
    X = rng.normal(size=(100, 20))
    assert np.array_equal(back.predict_proba(X), m.predict_proba(X))
    text = path.read_text()
    (tmp_path / "cut.json").write_text(text[: len(text) // 2])
    with pytest.raises(CorruptModelFile):
        ml.load_model(tmp_path / "cut.json")
    doc = json.loads(text)
    doc["format_version"] = 99
    (tmp_path / "v.json").write_text(json.dumps(doc))
    with pytest.raises(VersionMismatch):
        ml.load_model(tmp_path / "v.json")


# ---------------------------------------------------------------- cross-validation

def test_patient_folds_partition():
    folds = ml.patient_folds([f"P{i}" for i in range(10)], 5, seed=1)
    sizes = np.bincount(list(folds.values()))
    assert sizes.tolist() == [2] * 5
    assert ml.patient_folds([f"P{i}" for i in range(10)], 5, seed=1) == folds
    uneven = np.bincount(list(ml.patient_folds([f"P{i}" for i in range(13)], 5, 0).values()))
    assert uneven.max() - uneven.min() <= 1


def test_kfold_cv_patient_level_and_deterministic(rng):
    d0 = planted(rng, 120)
    patients = tuple(f"P{i // 3:03d}" for i in range(120))
    d = ml.Dataset(d0.features, d0.feature_ids, d0.labels, patients, d0.lesion_ids)
    trainer = lambda ds, s: ml.train("rf", ds, ml.ForestParams(n_trees=30), s)  # noqa: E731
    rep = ml.kfold_cv(d, 5, trainer, seed=11)
    assert rep.k == 5
    assert rep.mean_auc == pytest.approx(np.mean(rep.fold_aucs), abs=1e-12)
    assert rep.std_auc == pytest.approx(np.std(rep.fold_aucs), abs=1e-12)
    assert rep.mean_auc > 0.85
    lesion_fold = {}
    for lid, pid in zip(d.lesion_ids, d.patient_ids):
        lesion_fold[lid] = rep.fold_of_patient[pid]
    for pid in set(patients):
        assert len({lesion_fold[l] for l, p in zip(d.lesion_ids, patients) if p == pid}) == 1
    again = ml.kfold_cv(d, 5, trainer, seed=11)
    assert again.fold_aucs == rep.fold_aucs and again.importance == rep.importance
    assert rep.importance[0][0] == "f7"


def test_fold_class_collapse():
    y = np.array([1] * 9 + [0])
    d = dataset(np.arange(10.0)[:, None], y)
    with pytest.raises(FoldClassCollapse):
        ml.kfold_cv(d, 5, lambda ds, s: ml.train("gb", ds, FAST_GB, s), seed=0)
