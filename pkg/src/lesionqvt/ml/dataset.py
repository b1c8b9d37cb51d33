from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix with per-row labels and patient/lesion ids."""

    features: np.ndarray
    feature_ids: tuple[str, ...]
    labels: np.ndarray
    patient_ids: tuple[str, ...]
    lesion_ids: tuple[str, ...]

    def __post_init__(self):
        x = np.array(self.features, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError("features must be a 2D matrix")
        if not np.isfinite(x).all():
            raise ValueError("features contain NaN or infinite entries")
        ids = tuple(self.feature_ids)
        if len(ids) != x.shape[1]:
            raise ValueError(f"{len(ids)} feature ids for {x.shape[1]} columns")
        if len(set(ids)) != len(ids):
            raise ValueError("feature ids must be unique")
        y = np.asarray(self.labels).astype(np.int64)
        if y.shape != (x.shape[0],) or not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be one 0/1 value per row")
        for name in ("patient_ids", "lesion_ids"):
            if len(getattr(self, name)) != x.shape[0]:
                raise ValueError(f"{name} must have one entry per row")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "feature_ids", ids)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "patient_ids", tuple(map(str, self.patient_ids)))
        object.__setattr__(self, "lesion_ids", tuple(map(str, self.lesion_ids)))

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_cols(self) -> int:
        return self.features.shape[1]

    def rows(self, idx) -> Dataset:
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(
            self.features[idx],
            self.feature_ids,
            self.labels[idx],
            tuple(self.patient_ids[i] for i in idx),
            tuple(self.lesion_ids[i] for i in idx),
        )

    def columns(self, ids) -> Dataset:
        pos = {f: j for j, f in enumerate(self.feature_ids)}
        cols = [pos[f] for f in ids]
        return Dataset(self.features[:, cols], tuple(ids), self.labels, self.patient_ids, self.lesion_ids)
