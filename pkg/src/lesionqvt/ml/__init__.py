"""Tree ensembles, ROC analysis and patient-level cross-validation."""
from .cv import CvReport, kfold_cv, patient_folds
from .dataset import Dataset
from .ensemble import (
    FORMAT_VERSION,
    BoostingParams,
    ForestModel,
    ForestParams,
    GbModel,
    feature_importance,
    importance_weights,
    load_model,
    logistic_loss,
    predict_proba,
    save_model,
    train,
    train_gradient_boosting,
    train_random_forest,
)
from .metrics import roc_auc, roc_curve
from .tree import Tree, build_tree

__all__ = [
    "FORMAT_VERSION",
    "BoostingParams",
    "CvReport",
    "Dataset",
    "ForestModel",
    "ForestParams",
    "GbModel",
    "Tree",
    "build_tree",
    "feature_importance",
    "importance_weights",
    "kfold_cv",
    "load_model",
    "logistic_loss",
    "patient_folds",
    "predict_proba",
    "roc_auc",
    "roc_curve",
    "save_model",
    "train",
    "train_gradient_boosting",
    "train_random_forest",
]
