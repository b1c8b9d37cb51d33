from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ..errors import FoldClassCollapse
from .dataset import Dataset
from .ensemble import Model, importance_weights, rank_importance
from .metrics import roc_auc, roc_curve

Trainer = Callable[[Dataset, int], Model]


@dataclass(eq=False)
class CvReport:
    fold_aucs: list[float]
    mean_auc: float
    std_auc: float  # population (ddof = 0)
    roc: list[tuple[np.ndarray, np.ndarray, np.ndarray]]  # per fold (fpr, tpr, threshold)
    importance: list[tuple[str, float]]
    fold_of_patient: dict[str, int]
    scores: dict[str, float]  # out-of-fold score per lesion

    @property
    def k(self) -> int:
        return len(self.fold_aucs)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "fold_aucs": self.fold_aucs,
            "mean_auc": self.mean_auc,
            "std_auc": self.std_auc,
            "importance": [{"feature_id": f, "weight": w} for f, w in self.importance],
            "fold_of_patient": self.fold_of_patient,
            "scores": self.scores,
        }


def patient_folds(patient_ids, k: int, seed: int) -> dict[str, int]:
    """Shuffle the distinct patients with ``seed`` and deal them into ``k`` folds of near-equal size."""
    patients = sorted(set(patient_ids))
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > len(patients):
        raise ValueError(f"k = {k} exceeds the {len(patients)} distinct patients")
    perm = np.random.default_rng(seed).permutation(len(patients))
    out = {}
    for fold, chunk in enumerate(np.array_split(perm, k)):
        for i in chunk:
            out[patients[i]] = fold
    return dict(sorted(out.items()))


def fold_seed(seed: int, fold: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(fold)]).generate_state(1)[0])


def kfold_cv(d: Dataset, k: int, trainer: Trainer, seed: int = 0) -> CvReport:
    """Patient-level k-fold cross-validation: lesions of one patient never straddle train and test."""
    fold_of = patient_folds(d.patient_ids, k, seed)
    fold = np.array([fold_of[p] for p in d.patient_ids])
    for f in range(k):
        for part, rows in (("training", fold != f), ("test", fold == f)):
            classes = set(d.labels[rows].tolist())
            if classes != {0, 1}:
                raise FoldClassCollapse(
                    f"fold {f}: {part} part has {int(rows.sum())} lesions, all labeled {sorted(classes)}"
                )
    aucs, rocs, weights = [], [], []
    scores = np.zeros(d.n_rows)
    for f in range(k):
        train_idx, test_idx = np.flatnonzero(fold != f), np.flatnonzero(fold == f)
        model = trainer(d.rows(train_idx), fold_seed(seed, f))
        s = model.predict_proba(d.features[test_idx])
        scores[test_idx] = s
        aucs.append(roc_auc(s, d.labels[test_idx]))
        rocs.append(roc_curve(s, d.labels[test_idx]))
        weights.append(importance_weights(model))
    mean_w = np.mean(weights, axis=0)
    return CvReport(
        fold_aucs=[float(a) for a in aucs],
        mean_auc=float(np.mean(aucs)),
        std_auc=float(np.std(aucs)),
        roc=rocs,
        importance=rank_importance(mean_w / mean_w.sum(), d.feature_ids),
        fold_of_patient=fold_of,
        scores={lid: float(v) for lid, v in sorted(zip(d.lesion_ids, scores))},
    )
