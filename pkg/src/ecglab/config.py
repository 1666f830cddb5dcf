"""Flat TOML experiment configuration with flag and environment overrides.

Precedence, lowest first: built-in defaults, config file, ECGLAB_SEED, flags.
"""
from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

try:
    import tomllib as tomli
except ModuleNotFoundError:  # Python 3.10
    import tomli

from .streams import DEFAULT_SEED
from .words import C2C3_CAP, SubgroupSpec

KINDS = ("ecg", "growth", "maxima", "sl2z-example", "validate")
MODELS = ("tree-full", "tree-subgroup", "circle-harmonic")
SUBGROUPS = ("zk", "c2c3", "full")
MEASURES = ("patterson", "ambient")

MAX_RANK = 4
TREE_N_CAP = 24
TREE_FIELD_CAP = 20
CIRCLE_N_CAP = 10
ZK_M_CAP = 200
SAMPLES_CAP = 1_000_000
J_CAP = 100_000
REPLICATES_CAP = 100_000
THREADS_CAP = 256


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "ecg"
    model: str = "tree-full"
    d: int = 2
    subgroup: str = "zk"
    weights: tuple = (1, 0)
    assignment: tuple = ((0,), (1,))
    measure: str = "patterson"
    patterson_n: int = 14
    n_min: int = 1
    n_max: int = 10
    samples: int = 1000
    m_min: int = 1
    m_max: int = 30
    alpha: float = 1.5
    replicates: int = 400
    truncation: int = 1000
    radii: tuple = (4, 6, 8)
    floor: float = 0.01
    slope: float = 0.02
    decay: float = 2.0
    seed: int = DEFAULT_SEED
    out: str = "runs"
    threads: int = 1
    plots: bool = True

    def subgroup_spec(self) -> SubgroupSpec:
        if self.subgroup == "full":
            return SubgroupSpec.full(self.d)
        if self.subgroup == "zk":
            return SubgroupSpec.kernel_zk(self.weights)
        return SubgroupSpec.kernel_c2c3(self.assignment)

    def snapshot(self) -> dict:
        """Everything that determines outputs (thread count and output
        location excluded)."""
        d = dataclasses.asdict(self)
        d.pop("threads")
        d.pop("out")
        return _plain(d)


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}


def _tuplify(x):
    if isinstance(x, (list, tuple)):
        return tuple(_tuplify(v) for v in x)
    return x


def _coerce(key: str, value: Any) -> Any:
    default = _FIELDS[key].default
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(f"{key}: must be finite")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}")
        return value
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"{key}: expected a list, got {value!r}")
    value = _tuplify(value)

    def ints(v):
        return isinstance(v, int) and not isinstance(v, bool)

    if key == "radii" and not all(ints(v) for v in value):
        raise ConfigError("radii: expected a list of integers")
    if key == "weights" and not all(ints(v) or (isinstance(v, tuple) and all(map(ints, v))) for v in value):
        raise ConfigError("weights: expected integers or lists of integers")
    if key == "assignment" and not all(isinstance(v, tuple) and all(map(ints, v)) for v in value):
        raise ConfigError("assignment: expected lists of syllables")
    return value


def _apply(values: dict, source: Mapping[str, Any], origin: str) -> None:
    for key, value in source.items():
        key = key.replace("-", "_")
        if key not in _FIELDS:
            raise ConfigError(f"{origin}: unknown key {key!r}")
        if isinstance(value, dict):
            raise ConfigError(f"{origin}: nested tables are not supported ({key})")
        values[key] = _coerce(key, value)


def load_file(path: str | os.PathLike) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {p} does not exist")
    try:
        with p.open("rb") as fh:
            return tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{p}: {exc}") from exc


def parse_config(
    path: str | os.PathLike | None = None,
    overrides: Mapping[str, Any] | None = None,
    env: Mapping[str, str] | None = None,
) -> ExperimentConfig:
    values: dict = {}
    if path is not None:
        _apply(values, load_file(path), str(path))
    env = os.environ if env is None else env
    if env.get("ECGLAB_SEED"):
        try:
            values["seed"] = int(env["ECGLAB_SEED"], 0)
        except ValueError as exc:
            raise ConfigError(f"ECGLAB_SEED is not an integer: {env['ECGLAB_SEED']!r}") from exc
    if overrides:
        _apply(values, {k: v for k, v in overrides.items() if v is not None}, "flag")
    cfg = ExperimentConfig(**values)
    check(cfg)
    return cfg


def check(cfg: ExperimentConfig) -> None:
    """Range and cap checks; raises ConfigError."""

    def need(ok: bool, msg: str) -> None:
        if not ok:
            raise ConfigError(msg)

    need(cfg.kind in KINDS, f"kind must be one of {KINDS}")
    need(cfg.model in MODELS, f"model must be one of {MODELS}")
    need(cfg.subgroup in SUBGROUPS, f"subgroup must be one of {SUBGROUPS}")
    need(cfg.measure in MEASURES, f"measure must be one of {MEASURES}")
    need(2 <= cfg.d <= MAX_RANK, f"d must lie in 2..{MAX_RANK}")
    need(0.0 < cfg.alpha < 2.0, f"alpha must lie in (0, 2), got {cfg.alpha}")
    need(0 <= cfg.seed < 2 ** 64, "seed must be an unsigned 64-bit integer")
    need(1 <= cfg.threads <= THREADS_CAP, f"threads must lie in 1..{THREADS_CAP}")
    need(2 <= cfg.samples <= SAMPLES_CAP, f"samples must lie in 2..{SAMPLES_CAP}")
    need(50 <= cfg.truncation <= J_CAP, f"truncation must lie in 50..{J_CAP}")
    need(1 <= cfg.replicates <= REPLICATES_CAP, f"replicates must lie in 1..{REPLICATES_CAP}")
    need(0 <= cfg.n_min <= cfg.n_max, "need 0 <= n_min <= n_max")
    need(0 <= cfg.m_min <= cfg.m_max, "need 0 <= m_min <= m_max")
    need(len(cfg.radii) >= 1 and list(cfg.radii) == sorted(set(cfg.radii)), "radii must be ascending and distinct")
    need(min(cfg.radii) >= 0, "radii must be nonnegative")
    need(cfg.floor > 0 and cfg.slope >= 0 and cfg.decay > 1, "bad classification thresholds")
    need(1 <= cfg.patterson_n <= 20, "patterson_n must lie in 1..20")
    n_cap = CIRCLE_N_CAP if cfg.model == "circle-harmonic" else TREE_N_CAP
    need(cfg.n_max <= n_cap, f"n_max above the {cfg.model} cap {n_cap}")
    r_cap = CIRCLE_N_CAP if cfg.model == "circle-harmonic" else TREE_FIELD_CAP
    need(max(cfg.radii) <= r_cap, f"radii above the {cfg.model} cap {r_cap}")
    m_cap = C2C3_CAP if cfg.subgroup == "c2c3" else ZK_M_CAP
    need(cfg.m_max <= m_cap, f"m_max above the {cfg.subgroup} cap {m_cap}")
    if cfg.subgroup == "zk":
        need(len(cfg.weights) == cfg.d, "weights need one entry per generator")
    if cfg.subgroup == "c2c3":
        need(len(cfg.assignment) == cfg.d, "assignment needs one entry per generator")
        need(all(s in (0, 1, 2) for a in cfg.assignment for s in a), "syllables must be 0, 1 or 2")
    try:
        cfg.subgroup_spec()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
