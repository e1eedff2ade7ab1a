"""Seeded random scenarios: users dropped in a disc cell with Rayleigh fading.

The stream contract ``pcg64-v1``: ``numpy.random.default_rng(seed)`` draws
``M`` uniforms for distances followed by ``M`` uniforms for fading powers,
both via ``Generator.random``. Changing this order changes every scenario.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import Scenario, make_scenario

PRNG_CONTRACT = "pcg64-v1"


def noise_power(bandwidth: float, n0_dbm_hz: float) -> float:
    """Noise power in watts over ``bandwidth`` for a density in dBm/Hz."""
    return 10.0 ** ((n0_dbm_hz - 30.0) / 10.0) * bandwidth


def _as_tuple(v) -> tuple[float, ...]:
    if np.isscalar(v):
        return (float(v),)
    return tuple(float(x) for x in v)


@dataclass(frozen=True)
class ScenarioParams:
    """Cell, channel and per-user parameters.

    Per-user entries (``task_bits``, ``cycles_per_bit``, ``cpu_freq``,
    ``cap_coeff``) are lists assigned by position after sorting users by
    channel gain; a single value applies to every user. Longer lists are
    truncated to ``M``; shorter ones (other than length 1) are an error.
    """

    radius_m: float = 500.0
    pathloss: float = 3.76
    bandwidth: float = 1e6
    n0_dbm_hz: float = -174.0
    p_max: float = 0.01
    e_max: float = 0.2
    task_bits: tuple[float, ...] = (1.6e6,)
    cycles_per_bit: tuple[float, ...] = (1e3,)
    cpu_freq: tuple[float, ...] = (1e8,)
    cap_coeff: tuple[float, ...] = (1e-28,)
    min_distance_m: float = 1.0
    distance_law: str = "uniform-radius"

    def __post_init__(self):
        for name in ("task_bits", "cycles_per_bit", "cpu_freq", "cap_coeff"):
            object.__setattr__(self, name, _as_tuple(getattr(self, name)))
        for name in ("radius_m", "pathloss", "bandwidth", "e_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.p_max >= 0:
            raise ValueError("p_max must be non-negative")
        if not 0 <= self.min_distance_m < self.radius_m:
            raise ValueError("min_distance_m must lie in [0, radius_m)")
        if self.distance_law not in ("uniform-radius", "uniform-area"):
            raise ValueError(f"unknown distance_law {self.distance_law!r}")
        for name in ("task_bits", "cycles_per_bit", "cpu_freq"):
            if any(not x > 0 for x in getattr(self, name)):
                raise ValueError(f"{name} entries must be positive")
        if any(x < 0 for x in self.cap_coeff):
            raise ValueError("cap_coeff entries must be non-negative")

    def replace(self, **changes) -> "ScenarioParams":
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return ScenarioParams(**values)

    @property
    def noise(self) -> float:
        return noise_power(self.bandwidth, self.n0_dbm_hz)


def _per_user(values: Sequence[float], M: int, name: str) -> np.ndarray:
    if len(values) == 1:
        return np.full(M, values[0])
    if len(values) < M:
        raise ValueError(f"{name} has {len(values)} entries but M={M}")
    return np.asarray(values[:M], dtype=float)


def draw_channels(rng: np.random.Generator, M: int, params: ScenarioParams) -> np.ndarray:
    """Noise-normalized channel power gains in draw order (unsorted)."""
    u_d = rng.random(M)
    u_g = rng.random(M)
    lo, hi = params.min_distance_m, params.radius_m
    if params.distance_law == "uniform-radius":
        d = lo + (hi - lo) * u_d
    else:
        d = np.sqrt(lo**2 + (hi**2 - lo**2) * u_d)
    fading = -np.log1p(-u_g)  # |g|^2 ~ Exp(1) for unit-variance circular Gaussian g
    return fading / (1.0 + d**params.pathloss) / params.noise


def generate(seed: int, M: int, params: ScenarioParams = ScenarioParams()) -> Scenario:
    if M < 1:
        raise ValueError("M must be at least 1")
    rng = np.random.default_rng(seed)
    gains = np.sort(draw_channels(rng, M, params))
    return make_scenario(
        task_bits=_per_user(params.task_bits, M, "task_bits"),
        cycles_per_bit=_per_user(params.cycles_per_bit, M, "cycles_per_bit"),
        cpu_freq=_per_user(params.cpu_freq, M, "cpu_freq"),
        cap_coeff=_per_user(params.cap_coeff, M, "cap_coeff"),
        gains=gains,
        bandwidth=params.bandwidth,
        p_max=params.p_max,
        e_max=params.e_max,
    )
