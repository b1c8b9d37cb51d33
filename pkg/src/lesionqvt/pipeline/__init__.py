"""Manifest-driven extraction, labeling and feature tables."""
from .batch import LesionResult, extract_batch
from .config import Config, ConfigError, CvSettings, ExtractionSettings, config_from_dict, load_config
from .extract import (
    FEATURE_COLUMNS,
    PROFILES,
    TIMEPOINTS,
    extract_lesion_row,
    feature_id,
    parse_feature_id,
    timepoint_columns,
    timepoint_features,
)
from .labels import label_lesions, measured_diameters, read_diameters
from .manifest import LesionRecord, ManifestError, Scan, read_manifest
from .table import read_feature_table, select_profile, write_feature_table

__all__ = [
    "FEATURE_COLUMNS",
    "PROFILES",
    "TIMEPOINTS",
    "Config",
    "ConfigError",
    "CvSettings",
    "ExtractionSettings",
    "LesionRecord",
    "LesionResult",
    "ManifestError",
    "Scan",
    "config_from_dict",
    "extract_batch",
    "extract_lesion_row",
    "feature_id",
    "label_lesions",
    "load_config",
    "measured_diameters",
    "parse_feature_id",
    "read_diameters",
    "read_feature_table",
    "read_manifest",
    "select_profile",
    "timepoint_columns",
    "timepoint_features",
    "write_feature_table",
]
