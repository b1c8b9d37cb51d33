import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_levels(rng, max_dim=6, max_ng=4):
    """Random ROI on a grid of dims <= max_dim with levels 1..Ng (Ng <= max_ng)."""
    shape = tuple(int(s) for s in rng.integers(1, max_dim + 1, size=3))
    ng = int(rng.integers(1, max_ng + 1))
    levels = rng.integers(1, ng + 1, size=shape)
    roi = rng.random(shape) < rng.uniform(0.4, 1.0)
    if not roi.any():
        roi.flat[0] = True
    return np.where(roi, levels, 0)


@pytest.fixture(scope="session")
def cohort(tmp_path_factory):
    """A 40-lesion planted cohort shared by pipeline and CLI tests."""
    from lesionqvt.phantom import planted_dataset

    out = tmp_path_factory.mktemp("cohort")
    lesions = planted_dataset(40, out, seed=1)
    return out, lesions


@pytest.fixture(scope="session")
def cohort_table(cohort, tmp_path_factory):
    from lesionqvt.cli import main

    root, _ = cohort
    path = tmp_path_factory.mktemp("table") / "features.csv"
    assert main(["extract", "--manifest", str(root / "manifest.csv"), "--out", str(path)]) == 0
    return path


def write_manifest(path, rows):
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lesion_id", "patient_id", "timepoint", "volume_path", "lesion_mask_path", "lung_mask_path"])
        w.writerows(rows)
    return path


def manifest_rows(root, lesion_ids=None):
    import csv

    with open(root / "manifest.csv", newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    keep = [r for r in rows if lesion_ids is None or r[0] in lesion_ids]
    # absolute paths so subset manifests can live anywhere
    return [r[:3] + [str(root / p) if p else "" for p in r[3:]] for r in keep]


@pytest.fixture(scope="session")
def planted200(tmp_path_factory):
    """The n = 200, seed 7 planted cohort used by the end-to-end experiment."""
    import time

    from lesionqvt.cli import main

    out = tmp_path_factory.mktemp("planted200")
    t0 = time.perf_counter()
    assert main(["phantom", "make-dataset", "--n", "200", "--seed", "7", "--out", str(out)]) == 0
    return out, time.perf_counter() - t0


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record a PASS/FAIL line for the acceptance summary, then assert."""

    def check(name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} {name}" + (f": {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
