"""JSON run configuration. Every tunable has a key; omitted keys keep their defaults."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import LesionQvtError
from ..features import DEFAULT_BIN_WIDTH
from ..ml import BoostingParams, ForestParams
from ..qvt import VesselSettings


class ConfigError(LesionQvtError):
    pass


@dataclass(frozen=True)
class ExtractionSettings:
    target_spacing: float = 0.75
    bin_width: float = DEFAULT_BIN_WIDTH
    band_margin: float = 2.0
    band_mode: str = "outer"
    workers: int = 1


@dataclass(frozen=True)
class CvSettings:
    k: int = 5
    seed: int = 7
    top_n: int = 20


@dataclass(frozen=True)
class Config:
    extraction: ExtractionSettings = field(default_factory=ExtractionSettings)
    vessels: VesselSettings = field(default_factory=VesselSettings)
    rf: ForestParams = field(default_factory=ForestParams)
    gb: BoostingParams = field(default_factory=BoostingParams)
    cv: CvSettings = field(default_factory=CvSettings)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _section(cls, raw, name: str):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise ConfigError(f"unknown key(s) in {name!r}: {', '.join(unknown)}")
    try:
        obj = cls(**raw)
    except TypeError as e:
        raise ConfigError(f"bad section {name!r}: {e}") from e
    for key, value in raw.items():
        default = getattr(cls(), key)
        if value is not None and default is not None and not isinstance(value, type(default)):
            if not (isinstance(default, float) and isinstance(value, int) and not isinstance(value, bool)):
                raise ConfigError(f"{name}.{key} should be {type(default).__name__}, got {value!r}")
    return obj


def config_from_dict(raw: dict) -> Config:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    sections = {f.name: f for f in dataclasses.fields(Config)}
    unknown = sorted(set(raw) - set(sections))
    if unknown:
        raise ConfigError(f"unknown config section(s): {', '.join(unknown)}")
    kwargs = {name: _section(f.default_factory, raw.get(name), name) for name, f in sections.items()}
    cfg = Config(**kwargs)
    _validate(cfg)
    return cfg


def _validate(cfg: Config) -> None:
    e, v = cfg.extraction, cfg.vessels
    checks = [
        (e.target_spacing > 0, "extraction.target_spacing must be > 0"),
        (e.bin_width > 0, "extraction.bin_width must be > 0"),
        (e.band_margin >= 0, "extraction.band_margin must be >= 0"),
        (e.band_mode in ("outer", "symmetric"), "extraction.band_mode must be 'outer' or 'symmetric'"),
        (e.workers >= 1, "extraction.workers must be >= 1"),
        (v.vessel_mode in ("otsu", "fixed"), "vessels.vessel_mode must be 'otsu' or 'fixed'"),
        (v.vessel_mode != "fixed" or v.vessel_threshold is not None, "fixed vessel mode needs vessels.vessel_threshold"),
        (v.min_spur >= 0, "vessels.min_spur must be >= 0"),
        (v.curvature_window >= 1, "vessels.curvature_window must be >= 1"),
        (cfg.rf.n_trees >= 1, "rf.n_trees must be >= 1"),
        (cfg.rf.min_leaf >= 1, "rf.min_leaf must be >= 1"),
        (cfg.gb.n_stages >= 0, "gb.n_stages must be >= 0"),
        (cfg.gb.max_depth >= 1, "gb.max_depth must be >= 1"),
        (cfg.cv.k >= 2, "cv.k must be >= 2"),
    ]
    for ok, msg in checks:
        if not ok:
            raise ConfigError(msg)


def load_config(path=None) -> Config:
    if path is None:
        return Config()
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return config_from_dict(raw)
