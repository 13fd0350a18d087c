"""Run configuration (JSON file, command-line flags override file values)."""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .experiment.report import GRANULARITIES, ReportConfig
from .experiment.runner import DEFAULT_METRICS, DEFAULT_SNRS
from .metrics import BUILTIN
from .noise import DEFAULT_TALKERS, NoiseKind

SEED_ENV = "SQBENCH_SEED"


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field {field_name!r}: {message}")
        self.field = field_name


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "").strip()
    if not raw:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError("master_seed", f"{SEED_ENV}={raw!r} is not an integer") from None


@dataclass(frozen=True)
class RunConfig:
    manifest: Path
    snr_levels: tuple = DEFAULT_SNRS
    noises: tuple = tuple(k.value for k in NoiseKind)
    metrics: tuple = DEFAULT_METRICS
    parallelism: int = 1
    master_seed: int = field(default_factory=default_seed)
    output_dir: Path = Path("results")
    ks_granularity: str = "per-snr-mean"
    codec: bool = True
    babble_talkers: int = DEFAULT_TALKERS
    trim_threshold_dbfs: float = -50.0
    pesq_role: str = "disturbance"
    visqol_role: str = "nsim"
    focus_language: str = "Turkish"
    focus_gender: str = "male"

    @property
    def store_path(self) -> Path:
        return self.output_dir / "scores.jsonl"

    @property
    def report(self) -> ReportConfig:
        return ReportConfig(self.ks_granularity, self.pesq_role, self.visqol_role, self.focus_language,
                            self.focus_gender)

    def metric_names(self) -> list[str]:
        return [m if isinstance(m, str) else m["name"] for m in self.metrics]


def _validate(cfg: RunConfig) -> RunConfig:
    if not cfg.manifest:
        raise ConfigError("manifest", "required")
    snrs = cfg.snr_levels
    if not isinstance(snrs, (list, tuple)) or not snrs:
        raise ConfigError("snr_levels", "must be a non-empty list of numbers")
    try:
        snrs = tuple(float(s) for s in snrs)
    except (TypeError, ValueError):
        raise ConfigError("snr_levels", f"non-numeric entry in {cfg.snr_levels!r}") from None
    if not all(math.isfinite(s) for s in snrs) or len(set(snrs)) != len(snrs):
        raise ConfigError("snr_levels", "entries must be finite and distinct")
    if not cfg.noises:
        raise ConfigError("noises", "must be non-empty")
    try:
        noises = tuple(NoiseKind.parse(n).value for n in cfg.noises)
    except ValueError as exc:
        raise ConfigError("noises", str(exc)) from None
    if not cfg.metrics:
        raise ConfigError("metrics", "must be non-empty")
    for m in cfg.metrics:
        if isinstance(m, str):
            if m not in BUILTIN:
                raise ConfigError("metrics", f"unknown metric {m!r}; built-in: {sorted(BUILTIN)}")
        elif not (isinstance(m, dict) and isinstance(m.get("name"), str) and isinstance(m.get("command"), str)):
            raise ConfigError("metrics", f"external metric needs 'name' and 'command': {m!r}")
    names = cfg.metric_names() if isinstance(cfg.metrics, (list, tuple)) else []
    if len(set(names)) != len(names):
        raise ConfigError("metrics", f"duplicate metric names {names}")
    if not isinstance(cfg.parallelism, int) or cfg.parallelism < 1:
        raise ConfigError("parallelism", f"must be a positive integer, got {cfg.parallelism!r}")
    if not isinstance(cfg.master_seed, int) or isinstance(cfg.master_seed, bool):
        raise ConfigError("master_seed", f"must be an integer, got {cfg.master_seed!r}")
    if cfg.ks_granularity not in GRANULARITIES:
        raise ConfigError("ks_granularity", f"must be one of {GRANULARITIES}")
    if not isinstance(cfg.babble_talkers, int) or cfg.babble_talkers < 2:
        raise ConfigError("babble_talkers", "must be an integer >= 2")
    return replace(cfg, manifest=Path(cfg.manifest), output_dir=Path(cfg.output_dir), snr_levels=snrs,
                   noises=noises, metrics=tuple(cfg.metrics))


def load_config(path=None, **overrides) -> RunConfig:
    """Read a JSON config, apply non-None overrides, validate."""
    data = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError("config", f"file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be an object")
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(unknown[0], "unknown field")
    data.update({k: v for k, v in overrides.items() if v is not None})
    if "manifest" not in data:
        raise ConfigError("manifest", "required")
    return _validate(RunConfig(**data))
