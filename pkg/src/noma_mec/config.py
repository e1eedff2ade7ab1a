"""Flat ``key = value`` experiment configuration.

Blank lines and ``#`` comments are ignored. List-valued keys take
comma-separated numbers; a single number applies to every user. Every key
is optional. Recognized keys and defaults::

    M = 2                      # number of users
    seed = 0
    B_hz = 1e6
    p_max_w = 0.01
    e_max_j = 0.2
    n0_dbm_hz = -174
    radius_m = 500
    min_distance_m = 1
    distance_law = uniform-radius   # or uniform-area
    pathloss = 3.76
    L_bits = 1.6e6             # list
    C_cycles_per_bit = 1e3     # list
    f_loc = 1e8                # list, cycles/s
    kappa = 1e-28              # list
    epsilon = 1e-4             # bisection accuracy, seconds
    feas.eps_c = 1e-9
    feas.max_iters = 5000
    feas.tau = 1e-3
    feas.tau_min = 1e-7
    feas.nested = false        # per-prefix sum rates in the offload rows
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .bss import DEFAULT_EPSILON
from .feasibility import FeasibilityConfig
from .scenarios import ScenarioParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    M: int = 2
    seed: int = 0
    params: ScenarioParams = field(default_factory=ScenarioParams)
    epsilon: float = DEFAULT_EPSILON
    feasibility: FeasibilityConfig = field(default_factory=FeasibilityConfig)


def _float(text: str) -> float:
    return float(text)


def _int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _floats(text: str) -> tuple[float, ...]:
    items = [t.strip() for t in text.split(",")]
    if not items or any(t == "" for t in items):
        raise ValueError(f"malformed list {text!r}")
    return tuple(float(t) for t in items)


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


# key -> (section, attribute, parser)
_KEYS = {
    "M": ("top", "M", _int),
    "seed": ("top", "seed", _int),
    "epsilon": ("top", "epsilon", _float),
    "B_hz": ("params", "bandwidth", _float),
    "p_max_w": ("params", "p_max", _float),
    "e_max_j": ("params", "e_max", _float),
    "n0_dbm_hz": ("params", "n0_dbm_hz", _float),
    "radius_m": ("params", "radius_m", _float),
    "min_distance_m": ("params", "min_distance_m", _float),
    "distance_law": ("params", "distance_law", str),
    "pathloss": ("params", "pathloss", _float),
    "L_bits": ("params", "task_bits", _floats),
    "C_cycles_per_bit": ("params", "cycles_per_bit", _floats),
    "f_loc": ("params", "cpu_freq", _floats),
    "kappa": ("params", "cap_coeff", _floats),
    "feas.eps_c": ("feas", "eps_c", _float),
    "feas.max_iters": ("feas", "max_iters", _int),
    "feas.tau": ("feas", "tau", _float),
    "feas.tau_min": ("feas", "tau_min", _float),
    "feas.nested": ("feas", "nested_rates", _bool),
}


def parse_config(text: str) -> ExperimentConfig:
    sections: dict[str, dict] = {"top": {}, "params": {}, "feas": {}}
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        section, attr, parse = _KEYS[key]
        try:
            sections[section][attr] = parse(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from None
    try:
        params = ScenarioParams(**sections["params"])
        feas = replace(FeasibilityConfig(), **sections["feas"])
        cfg = ExperimentConfig(params=params, feasibility=feas, **sections["top"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    if cfg.M < 1:
        raise ConfigError("M must be at least 1")
    if not cfg.epsilon > 0:
        raise ConfigError("epsilon must be positive")
    f = cfg.feasibility
    if not (f.eps_c > 0 and f.max_iters >= 0 and f.tau > 0 and 0 < f.tau_min <= f.tau):
        raise ConfigError("feasibility settings out of range")
    for name in ("task_bits", "cycles_per_bit", "cpu_freq", "cap_coeff"):
        n = len(getattr(cfg.params, name))
        if n != 1 and n < cfg.M:
            raise ConfigError(f"{name} lists {n} values for M={cfg.M} users")


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)
