from __future__ import annotations

import csv
from pathlib import Path

from ..roi import DiameterRecord, recist_diameter, shrinkage_label
from ..volume import read_mask
from .manifest import LesionRecord, ManifestError


def label_lesions(diameters: dict[str, list[DiameterRecord]]) -> dict[str, int]:
    """Shrinkage label per lesion over all of its timepoints (earliest = baseline)."""
    out = {}
    for lid in sorted(diameters):
        recs = sorted(diameters[lid], key=lambda r: r.timepoint)
        out[lid] = shrinkage_label(recs[0], recs[1:])
    return out


def read_diameters(path) -> dict[str, list[DiameterRecord]]:
    """Diameter table with columns lesion_id, timepoint, diameter_mm (others ignored)."""
    path = Path(path)
    out: dict[str, list[DiameterRecord]] = {}
    try:
        with open(path, newline="") as fh:
            for line, row in enumerate(csv.DictReader(fh), start=2):
                try:
                    rec = DiameterRecord(row["lesion_id"], int(row["timepoint"]), float(row["diameter_mm"]))
                except (KeyError, TypeError, ValueError) as e:
                    raise ManifestError(f"{path}:{line}: bad diameter row ({e})") from e
                out.setdefault(rec.lesion_id, []).append(rec)
    except OSError as e:
        raise ManifestError(f"cannot read diameters {path}: {e}") from e
    return out


def measured_diameters(rec: LesionRecord) -> list[DiameterRecord]:
    """RECIST diameter of every scan's lesion mask at native resolution."""
    return [
        DiameterRecord(rec.lesion_id, s.timepoint, recist_diameter(read_mask(s.lesion_mask_path)))
        for s in rec.scans
    ]
