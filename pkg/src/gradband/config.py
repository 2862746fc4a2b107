"""INI configuration for experiments.

Every tunable of the pipeline lives in one file with one section per stage.
``default_config_text()`` renders the full set of defaults; any key left out of
a user file keeps its default.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .a3c import TrainConfig
from .cdg import CdgConfig
from .immunize import RetrainConfig
from .validation import AttackParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusConfig:
    sizes: tuple[int, ...] = (10, 20, 30)
    count: int = 20
    density: float = 0.15
    seed: int = 0


@dataclass(frozen=True)
class ValidationConfig:
    omega1: float = 0.3
    omega2: float = 0.7
    epsilon: float | None = None  # None: epsilon_factor * clean greedy time
    epsilon_factor: float = 3.0
    mode: str = "steps"
    trials: int = 5
    rollout_mode: str = "greedy"


@dataclass(frozen=True)
class ExperimentConfig:
    workers: int = 1
    plots: bool = True
    plot_format: str = "svg"
    baseline: bool = True
    min_baseline_valid: int = 5


@dataclass
class Config:
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    cdg: CdgConfig = field(default_factory=CdgConfig)
    validation: ValidationConfig = field(default_factory=ValidationConfig)
    immunize: RetrainConfig = field(default_factory=RetrainConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)

    def to_dict(self) -> dict:
        return {name: dataclasses.asdict(getattr(self, name)) for name in SECTIONS}


SECTIONS = ("corpus", "train", "cdg", "validation", "immunize", "experiment")


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    return str(value)


def _parse(raw: str, default, key: str):
    text = raw.strip()
    optional = default is None or key in ("total_env_steps", "step_cap", "epsilon")
    if optional and text.lower() in ("", "none"):
        return None
    if isinstance(default, bool):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if isinstance(default, tuple):
        return tuple(int(v) for v in text.replace(",", " ").split())
    if isinstance(default, int) or key in ("total_env_steps", "step_cap"):
        return int(text)
    if isinstance(default, float) or key == "epsilon":
        return float(text)
    return text


def default_config_text() -> str:
    parser = configparser.ConfigParser()
    defaults = Config()
    for name in SECTIONS:
        section = getattr(defaults, name)
        parser[name] = {f.name: _format(getattr(section, f.name)) for f in dataclasses.fields(section)}
    lines = []
    for name in SECTIONS:
        lines.append(f"[{name}]")
        lines += [f"{k} = {v}".rstrip() for k, v in parser[name].items()]
        lines.append("")
    return "\n".join(lines)


def load_config(path: str | Path | None = None) -> Config:
    """Read an INI file over the defaults; unknown sections or keys are errors."""
    cfg = Config()
    if path is None:
        return cfg
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    for name in parser.sections():
        if name not in SECTIONS:
            raise ConfigError(f"unknown config section [{name}]")
        section = getattr(cfg, name)
        known = {f.name: f for f in dataclasses.fields(section)}
        changes = {}
        for key, raw in parser[name].items():
            if key not in known:
                raise ConfigError(f"unknown key {key!r} in [{name}]")
            try:
                changes[key] = _parse(raw, getattr(section, key), key)
            except ValueError as exc:
                raise ConfigError(f"[{name}] {key}: {exc}") from exc
        try:
            setattr(cfg, name, dataclasses.replace(section, **changes))
        except ValueError as exc:
            raise ConfigError(f"[{name}]: {exc}") from exc
    check(cfg)
    return cfg


def check(cfg: Config) -> None:
    try:
        cfg.cdg.validate()
        for n in cfg.corpus.sizes:
            cfg.train.validate(n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    v = cfg.validation
    try:
        AttackParams(v.omega1, v.omega2, 1.0 if v.epsilon is None else v.epsilon, v.mode)
    except ValueError as exc:
        raise ConfigError(f"[validation] {exc}") from exc
    if v.mode not in ("steps", "seconds") or v.rollout_mode not in ("greedy", "stochastic"):
        raise ConfigError("validation mode must be steps|seconds and rollout_mode greedy|stochastic")
    if v.trials < 1 or v.epsilon_factor <= 0:
        raise ConfigError("validation trials and epsilon_factor must be positive")
    if not 0.0 <= cfg.corpus.density < 1.0:
        raise ConfigError(f"corpus density must lie in [0, 1), got {cfg.corpus.density}")
    if cfg.experiment.workers < 1:
        raise ConfigError("experiment workers must be >= 1")
