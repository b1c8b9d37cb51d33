"""Two-timepoint feature rows: per scan, 93 lesion + 93 band + 44 vessel columns."""
from __future__ import annotations

import re

import numpy as np

from ..errors import EmptyMaskAfterResample, MissingTimepoint
from ..features import ROI_FEATURE_IDS, roi_feature_block
from ..qvt import VESSEL_FEATURE_IDS, lesion_attached_tree, lung_mask_threshold, segment_vessels, tree_features
from ..roi import boundary_band
from ..volume import check_geometry, read_mask, read_volume, resample_isotropic, resample_mask_nearest
from .config import Config
from .manifest import LesionRecord, Scan

TIMEPOINTS = ("TP1", "TP2")
ROIS = ("L", "B")


def feature_id(base: str, roi: str | None, tp: str) -> str:
    return f"{base}_{roi}_{tp}" if roi else f"{base}_{tp}"


def timepoint_columns(tp: str) -> tuple[str, ...]:
    """The 230 columns of one timepoint: lesion block, band block, vessel block."""
    return (
        tuple(feature_id(f, "L", tp) for f in ROI_FEATURE_IDS)
        + tuple(feature_id(f, "B", tp) for f in ROI_FEATURE_IDS)
        + tuple(feature_id(f, None, tp) for f in VESSEL_FEATURE_IDS)
    )


FEATURE_COLUMNS: tuple[str, ...] = sum((timepoint_columns(tp) for tp in TIMEPOINTS), ())

PROFILES = {
    "both": FEATURE_COLUMNS,
    "tp1": timepoint_columns("TP1"),
    "tp2": timepoint_columns("TP2"),
}

_ID = re.compile(r"^(?P<family>[a-z]+)_(?P<name>.+?)(?:_(?P<roi>[LB]))?_(?P<tp>TP\d+)$")


def parse_feature_id(fid: str) -> tuple[str, str, str | None, str]:
    """Split a column id into (family, name, roi, timepoint); roi is None for vessel columns."""
    m = _ID.match(fid)
    if not m:
        raise ValueError(f"not a feature column id: {fid!r}")
    family, name, roi, tp = m.group("family", "name", "roi", "tp")
    if family in ("qvt", "fractal"):
        if roi is not None:
            raise ValueError(f"vessel column {fid!r} cannot carry an ROI")
    elif roi is None:
        raise ValueError(f"radiomics column {fid!r} lacks an ROI")
    return family, name, roi, tp


def _load_scan(scan: Scan, target: float):
    v = read_volume(scan.volume_path)
    lesion = read_mask(scan.lesion_mask_path)
    check_geometry(v, lesion)
    lung = None
    if scan.lung_mask_path is not None:
        lung = read_mask(scan.lung_mask_path)
        check_geometry(v, lung)
    v = resample_isotropic(v, target)
    lesion = resample_mask_nearest(lesion, target)
    if lung is not None:
        lung = resample_mask_nearest(lung, target)
    if not lesion.data.any():
        raise EmptyMaskAfterResample(f"{scan.lesion_mask_path}: lesion mask empty at {target} mm")
    return v, lesion, lung


def timepoint_features(scan: Scan, tp: str, cfg: Config) -> dict[str, float]:
    e = cfg.extraction
    v, lesion, lung = _load_scan(scan, e.target_spacing)
    band = boundary_band(lesion, e.band_margin, e.band_mode)
    if not band.data.any():
        raise EmptyMaskAfterResample(f"{scan.lesion_mask_path}: boundary band is empty")
    out = {}
    for roi, mask in (("L", lesion), ("B", band)):
        for k, val in roi_feature_block(v, mask, e.bin_width).items():
            out[feature_id(k, roi, tp)] = val
    s = cfg.vessels
    if lung is None:
        lung = lung_mask_threshold(v, s.lung_threshold, s.lung_closing_radius)
    vessels = segment_vessels(v, lung, s.vessel_mode, s.vessel_threshold)
    for k, val in tree_features(lesion_attached_tree(vessels, lesion), s).items():
        out[feature_id(k, None, tp)] = val
    return out


def extract_lesion_row(rec: LesionRecord, cfg: Config = Config()) -> dict[str, float]:
    """The 460 feature columns of one lesion, in :data:`FEATURE_COLUMNS` order.

    Scans beyond the first follow-up are ignored here; they still count
    toward the label.
    """
    row = {}
    for index, tp in enumerate(TIMEPOINTS):
        scan = rec.scan(index)
        if scan is None:
            raise MissingTimepoint(f"lesion {rec.lesion_id} has no scan at timepoint {index}")
        row.update(timepoint_features(scan, tp, cfg))
    values = {k: float(row[k]) for k in FEATURE_COLUMNS}
    bad = [k for k, x in values.items() if not np.isfinite(x)]
    if bad:
        raise ValueError(f"lesion {rec.lesion_id}: non-finite feature(s) {', '.join(bad[:5])}")
    return values
