from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from ..errors import LesionQvtError
from ..roi import DiameterRecord
from .config import Config
from .extract import extract_lesion_row
from .labels import label_lesions, measured_diameters
from .manifest import LesionRecord

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LesionResult:
    lesion_id: str
    patient_id: str
    label: int | None
    values: dict[str, float] | None
    error: str | None


def _process(rec: LesionRecord, cfg: Config, diameters: list[DiameterRecord] | None) -> LesionResult:
    try:
        if len(rec.scans) < 2:
            raise LesionQvtError(f"lesion {rec.lesion_id} has {len(rec.scans)} scan(s); 2 are required")
        diam = diameters if diameters is not None else measured_diameters(rec)
        label = label_lesions({rec.lesion_id: diam})[rec.lesion_id]
        values = extract_lesion_row(rec, cfg)
        return LesionResult(rec.lesion_id, rec.patient_id, label, values, None)
    except (LesionQvtError, OSError, ValueError) as e:
        return LesionResult(rec.lesion_id, rec.patient_id, None, None, f"{type(e).__name__}: {e}")


def extract_batch(
    records: list[LesionRecord],
    cfg: Config = Config(),
    diameters: dict[str, list[DiameterRecord]] | None = None,
) -> list[LesionResult]:
    """Label and extract every lesion; failures are returned, never raised.

    Results come back in lesion-id order whatever the worker count.
    """
    def diam(rec):
        if diameters is None:
            return None
        return diameters.get(rec.lesion_id, [])

    if cfg.extraction.workers > 1 and len(records) > 1:
        with ProcessPoolExecutor(max_workers=cfg.extraction.workers) as pool:
            results = list(pool.map(_process, records, [cfg] * len(records), map(diam, records)))
    else:
        results = [_process(r, cfg, diam(r)) for r in records]
    for r in results:
        if r.error:
            log.warning("skipping lesion %s: %s", r.lesion_id, r.error)
    return sorted(results, key=lambda r: r.lesion_id)
