"""Feature CSV: lesion_id, patient_id, label, then one column per feature id."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..ml import Dataset
from .extract import PROFILES

ID_COLUMNS = ("lesion_id", "patient_id", "label")


def format_value(x: float) -> str:
    return format(float(x), ".17g")


def write_feature_table(rows: list[tuple[str, str, int, dict[str, float]]], columns, path) -> None:
    """Rows are (lesion_id, patient_id, label, values); written sorted by lesion id."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*ID_COLUMNS, *columns])
        for lid, pid, label, values in sorted(rows, key=lambda r: r[0]):
            w.writerow([lid, pid, int(label), *(format_value(values[c]) for c in columns)])


def read_feature_table(path) -> Dataset:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty") from None
        if tuple(header[:3]) != ID_COLUMNS:
            raise ValueError(f"{path}: header must start with {', '.join(ID_COLUMNS)}")
        lids, pids, labels, values = [], [], [], []
        for line, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}:{line}: {len(row)} fields, header has {len(header)}")
            lids.append(row[0])
            pids.append(row[1])
            labels.append(int(row[2]))
            values.append([float(x) for x in row[3:]])
    if not lids:
        raise ValueError(f"{path} has no data rows")
    return Dataset(np.array(values), tuple(header[3:]), np.array(labels), tuple(pids), tuple(lids))


def select_profile(d: Dataset, profile: str) -> Dataset:
    """Restrict to a timepoint profile; both -> 460 columns, tp1/tp2 -> 230."""
    try:
        cols = PROFILES[profile]
    except KeyError:
        raise ValueError(f"unknown profile {profile!r}; expected one of {', '.join(PROFILES)}") from None
    missing = [c for c in cols if c not in set(d.feature_ids)]
    if missing:
        raise ValueError(f"feature table lacks {len(missing)} column(s) of profile {profile!r}, e.g. {missing[0]}")
    out = d.columns(cols)
    expected = 460 if profile == "both" else 230
    assert out.n_cols == expected, (profile, out.n_cols)
    return out
