from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from ..errors import LesionQvtError

MANIFEST_COLUMNS = ("lesion_id", "patient_id", "timepoint", "volume_path", "lesion_mask_path", "lung_mask_path")
_REQUIRED = MANIFEST_COLUMNS[:5]


class ManifestError(LesionQvtError):
    pass


@dataclass(frozen=True)
class Scan:
    timepoint: int
    volume_path: Path
    lesion_mask_path: Path
    lung_mask_path: Path | None = None


@dataclass(frozen=True)
class LesionRecord:
    lesion_id: str
    patient_id: str
    scans: tuple[Scan, ...]

    def scan(self, timepoint: int) -> Scan | None:
        return next((s for s in self.scans if s.timepoint == timepoint), None)


def read_manifest(path) -> list[LesionRecord]:
    """Parse a manifest CSV into records sorted by lesion id.

    Relative paths resolve against the manifest's directory. Any structural
    problem (missing columns, bad timepoints, a lesion listed under two
    patients, duplicate timepoints) raises :class:`ManifestError`.
    """
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            missing = [c for c in _REQUIRED if c not in header]
            if missing:
                raise ManifestError(f"{path}: missing column(s) {', '.join(missing)}")
            rows = list(reader)
    except (OSError, UnicodeDecodeError, csv.Error) as e:
        raise ManifestError(f"cannot read manifest {path}: {e}") from e

    base = path.parent
    by_lesion: dict[str, tuple[str, list[Scan]]] = {}
    for line, row in enumerate(rows, start=2):
        if None in row or any(row.get(c) in (None, "") for c in _REQUIRED):
            raise ManifestError(f"{path}:{line}: malformed row")
        try:
            tp = int(row["timepoint"])
        except ValueError:
            raise ManifestError(f"{path}:{line}: timepoint {row['timepoint']!r} is not an integer") from None
        if tp < 0:
            raise ManifestError(f"{path}:{line}: negative timepoint")
        lung = (row.get("lung_mask_path") or "").strip()
        scan = Scan(tp, base / row["volume_path"], base / row["lesion_mask_path"], base / lung if lung else None)
        lid, pid = row["lesion_id"], row["patient_id"]
        owner, scans = by_lesion.setdefault(lid, (pid, []))
        if owner != pid:
            raise ManifestError(f"{path}:{line}: lesion {lid} listed under patients {owner} and {pid}")
        if any(s.timepoint == tp for s in scans):
            raise ManifestError(f"{path}:{line}: lesion {lid} repeats timepoint {tp}")
        scans.append(scan)

    return [
        LesionRecord(lid, pid, tuple(sorted(scans, key=lambda s: s.timepoint)))
        for lid, (pid, scans) in sorted(by_lesion.items())
    ]
