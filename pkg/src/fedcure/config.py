"""Experiment configuration: dataclasses, YAML ingestion, validation."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError

SCHEDULERS = ("fedcure", "greedy", "fair")


@dataclass
class PopulationConfig:
    """Synthetic client/edge heterogeneity (unit scale: Gcycles, GHz, seconds)."""

    samples_per_client: int = 100
    labels_per_coalition: int = 2
    comp_load: tuple[float, float] = (0.2, 2.0)
    f_max: tuple[float, float] = (1.0, 3.0)
    comm_delay: tuple[float, float] = (0.1, 1.0)
    edge_cloud_delay: tuple[float, float] = (0.0, 200.0)
    noise_sigma: float = 0.1


@dataclass
class LearnerConfig:
    enabled: bool = False
    dim: int = 20
    class_sep: float = 3.0
    test_per_class: int = 100
    lr: float = 0.01
    batch_size: int = 16


@dataclass
class ExperimentConfig:
    n_clients: int = 50
    n_edges: int = 5
    n_classes: int = 10
    tau_c: int = 5
    tau_e: int = 12
    tau_g: int = 200
    ell: float = 0.2
    kpen: float = 0.9
    beta: float = 0.5
    kappa: float = 1.0
    alpha: float = 1.0
    gamma: float = 1.0
    varsigma: float = 2.0
    seed: int = 0
    scheduler_kind: str = "fedcure"
    max_game_iters: int = 20000
    population: PopulationConfig = field(default_factory=PopulationConfig)
    learner: LearnerConfig = field(default_factory=LearnerConfig)

    def validate(self) -> "ExperimentConfig":
        problems = []
        if not self.n_clients >= self.n_edges >= 1:
            problems.append("need n_clients >= n_edges >= 1")
        if self.n_classes < 1:
            problems.append("n_classes must be >= 1")
        for name in ("tau_c", "tau_e", "tau_g", "max_game_iters"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be >= 1")
        if not 0 < self.ell < 1:
            problems.append("ell must lie in (0, 1)")
        if not 0 < self.kpen < 1:
            problems.append("kpen must lie in (0, 1)")
        if self.beta <= 0:
            problems.append("beta must be > 0")
        if not 0 <= self.kappa <= 1:
            problems.append("kappa must lie in [0, 1]")
        if self.alpha <= 0 or self.gamma <= 0:
            problems.append("alpha and gamma must be > 0")
        if self.varsigma < 1:
            problems.append("varsigma must be >= 1")
        if self.scheduler_kind not in SCHEDULERS:
            problems.append(f"scheduler_kind must be one of {SCHEDULERS}")
        pop = self.population
        for name in ("comp_load", "f_max", "comm_delay", "edge_cloud_delay"):
            lo, hi = getattr(pop, name)
            if lo > hi or lo < 0:
                problems.append(f"population.{name} must be an ordered nonnegative range")
        if pop.comp_load[0] <= 0 or pop.f_max[0] <= 0:
            problems.append("population.comp_load and population.f_max must be > 0")
        if pop.noise_sigma < 0:
            problems.append("population.noise_sigma must be >= 0")
        if pop.samples_per_client < pop.labels_per_coalition or pop.labels_per_coalition < 1:
            problems.append("population.samples_per_client must cover labels_per_coalition >= 1")
        ln = self.learner
        if ln.dim < 1 or ln.test_per_class < 1 or ln.batch_size < 1:
            problems.append("learner.dim, test_per_class and batch_size must be >= 1")
        if ln.lr < 0 or ln.class_sep < 0:
            problems.append("learner.lr and learner.class_sep must be >= 0")
        if problems:
            raise ConfigError("; ".join(problems))
        return self

    def to_dict(self) -> dict[str, Any]:
        """Plain JSON-ready mapping; tuples become lists."""
        return dataclasses.asdict(self, dict_factory=lambda kv: {k: list(v) if isinstance(v, tuple) else v
                                                                 for k, v in kv})

    def replace(self, **changes: Any) -> "ExperimentConfig":
        return apply_overrides(self, changes)


_NESTED = {"population": PopulationConfig, "learner": LearnerConfig}


def _coerce(value: Any, like: Any, name: str) -> Any:
    if isinstance(like, bool):
        if isinstance(value, str):
            if value.lower() in ("1", "true", "yes", "on"):
                return True
            if value.lower() in ("0", "false", "no", "off"):
                return False
            raise ConfigError(f"{name}: expected a boolean, got {value!r}")
        return bool(value)
    if isinstance(like, tuple):
        if isinstance(value, str):
            value = [v for v in value.replace(",", " ").split()]
        try:
            lo, hi = (float(v) for v in value)
        except (TypeError, ValueError):
            raise ConfigError(f"{name}: expected a [low, high] pair, got {value!r}") from None
        return (lo, hi)
    try:
        if isinstance(like, int):
            as_float = float(value)
            if as_float != int(as_float):
                raise ValueError
            return int(as_float)
        if isinstance(like, float):
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: cannot interpret {value!r} as {type(like).__name__}") from None
    return str(value)


def field_names(cfg: ExperimentConfig | None = None) -> list[str]:
    """Dotted names of every scalar field, e.g. ``beta`` or ``population.noise_sigma``."""
    cfg = cfg or ExperimentConfig()
    names = []
    for f in dataclasses.fields(cfg):
        if f.name in _NESTED:
            names += [f"{f.name}.{g.name}" for g in dataclasses.fields(getattr(cfg, f.name))]
        else:
            names.append(f.name)
    return names


def get_field(cfg: ExperimentConfig, dotted: str) -> Any:
    obj: Any = cfg
    for part in dotted.split("."):
        if not hasattr(obj, part):
            raise ConfigError(f"unknown config field {dotted!r}")
        obj = getattr(obj, part)
    return obj


def apply_overrides(cfg: ExperimentConfig, overrides: dict[str, Any]) -> ExperimentConfig:
    """Return a copy of ``cfg`` with dotted-name overrides applied and coerced."""
    top: dict[str, Any] = {}
    nested: dict[str, dict[str, Any]] = {k: {} for k in _NESTED}
    for name, value in overrides.items():
        if name in _NESTED and isinstance(value, dict):
            for k, v in value.items():
                nested[name][k] = v
            continue
        head, _, tail = name.partition(".")
        if tail:
            nested.setdefault(head, {})[tail] = value
        else:
            top[name] = value
    known_top = {f.name for f in dataclasses.fields(cfg)}
    changes: dict[str, Any] = {}
    for name, value in top.items():
        if name not in known_top or name in _NESTED:
            raise ConfigError(f"unknown config field {name!r}")
        changes[name] = _coerce(value, getattr(cfg, name), name)
    for section, values in nested.items():
        if section not in _NESTED:
            raise ConfigError(f"unknown config section {section!r}")
        if not values:
            continue
        sub = getattr(cfg, section)
        known = {f.name for f in dataclasses.fields(sub)}
        sub_changes = {}
        for k, v in values.items():
            if k not in known:
                raise ConfigError(f"unknown config field {section}.{k!r}")
            sub_changes[k] = _coerce(v, getattr(sub, k), f"{section}.{k}")
        changes[section] = dataclasses.replace(sub, **sub_changes)
    return dataclasses.replace(cfg, **changes)


def load_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if path is not None:
        try:
            raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: not valid YAML ({exc})") from None
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        cfg = apply_overrides(cfg, raw)
    if overrides:
        cfg = apply_overrides(cfg, overrides)
    return cfg.validate()
