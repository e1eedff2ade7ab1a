"""Physical model of NOMA uplink offloading with partial local execution.

Channel gains are stored noise-normalized (``|h|^2 / sigma^2``), so every
noise term below is 1. User indices are 0-based; users are kept sorted by
ascending channel gain, which is also the SIC order: user ``m`` is decoded
after every stronger user and sees only users ``0..m-1`` as interference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

INF = math.inf


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class UserProfile:
    """Task, CPU and channel parameters of one user."""

    task_bits: float
    cycles_per_bit: float
    cpu_freq: float
    cap_coeff: float
    channel_gain: float

    def __post_init__(self):
        for name in ("task_bits", "cycles_per_bit", "cpu_freq", "channel_gain"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if not (self.cap_coeff >= 0 and math.isfinite(self.cap_coeff)):
            raise ValueError(f"cap_coeff must be >= 0, got {self.cap_coeff!r}")

    @property
    def local_only_time(self) -> float:
        return self.task_bits * self.cycles_per_bit / self.cpu_freq


@dataclass(frozen=True)
class Scenario:
    users: tuple[UserProfile, ...]
    bandwidth: float
    p_max: float
    e_max: float

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        if len(self.users) < 1:
            raise ValueError("a scenario needs at least one user")
        gains = [u.channel_gain for u in self.users]
        if any(a > b for a, b in zip(gains, gains[1:])):
            raise ValueError("users must be sorted by ascending channel gain")
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        if not self.p_max >= 0:
            raise ValueError("p_max must be non-negative")
        if not self.e_max > 0:
            raise ValueError("e_max must be positive")

    @property
    def num_users(self) -> int:
        return len(self.users)

    @cached_property
    def task_bits(self) -> np.ndarray:
        return _frozen([u.task_bits for u in self.users])

    @cached_property
    def cycles_per_bit(self) -> np.ndarray:
        return _frozen([u.cycles_per_bit for u in self.users])

    @cached_property
    def cpu_freq(self) -> np.ndarray:
        return _frozen([u.cpu_freq for u in self.users])

    @cached_property
    def cap_coeff(self) -> np.ndarray:
        return _frozen([u.cap_coeff for u in self.users])

    @cached_property
    def gains(self) -> np.ndarray:
        return _frozen([u.channel_gain for u in self.users])

    @cached_property
    def local_only_times(self) -> np.ndarray:
        """``L*C/f`` per user: completion time with nothing offloaded."""
        return _frozen(self.task_bits * self.cycles_per_bit / self.cpu_freq)

    @cached_property
    def local_only_energy(self) -> np.ndarray:
        """``kappa*L*C*f^2`` per user: energy with nothing offloaded."""
        return _frozen(self.cap_coeff * self.task_bits * self.cycles_per_bit * self.cpu_freq**2)

    def replace(self, **changes) -> "Scenario":
        fields = dict(users=self.users, bandwidth=self.bandwidth, p_max=self.p_max, e_max=self.e_max)
        fields.update(changes)
        return Scenario(**fields)


@dataclass(frozen=True, eq=False)
class Allocation:
    """Offloaded fraction ``beta`` and transmit power per user."""

    beta: np.ndarray = field()
    power: np.ndarray = field()

    def __post_init__(self):
        beta = _frozen(self.beta)
        power = _frozen(self.power)
        if beta.shape != power.shape or beta.ndim != 1:
            raise ValueError("beta and power must be 1-d vectors of equal length")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "power", power)

    @classmethod
    def zeros(cls, num_users: int) -> "Allocation":
        return cls(np.zeros(num_users), np.zeros(num_users))

    def validate(self, scenario: Scenario, tol: float = 0.0) -> None:
        if self.beta.size != scenario.num_users:
            raise ValueError("allocation length does not match the number of users")
        if np.any(self.beta < -tol) or np.any(self.beta > 1 + tol):
            raise ValueError("beta must lie in [0, 1]")
        if np.any(self.power < -tol) or np.any(self.power > scenario.p_max * (1 + tol) + tol):
            raise ValueError("power must lie in [0, p_max]")


def _check_index(scenario: Scenario, m: int) -> None:
    if not 0 <= m < scenario.num_users:
        raise IndexError(f"user index {m} out of range for {scenario.num_users} users")


def received_power(scenario: Scenario, allocation: Allocation, upto: int) -> float:
    """Noise-normalized received power of users ``0..upto-1``."""
    return float(np.dot(scenario.gains[:upto], allocation.power[:upto]))


def sinr(scenario: Scenario, allocation: Allocation, m: int) -> float:
    _check_index(scenario, m)
    interference = received_power(scenario, allocation, m)
    return float(scenario.gains[m] * allocation.power[m]) / (interference + 1.0)


def rate(scenario: Scenario, allocation: Allocation, m: int) -> float:
    """Achievable uplink rate of user ``m`` in bits/s."""
    return scenario.bandwidth * math.log2(1.0 + sinr(scenario, allocation, m))


def rate_quotient_form(scenario: Scenario, allocation: Allocation, m: int) -> float:
    """Same rate written as the log of a ratio of cumulative received powers."""
    _check_index(scenario, m)
    num = received_power(scenario, allocation, m + 1) + 1.0
    den = received_power(scenario, allocation, m) + 1.0
    return scenario.bandwidth * math.log2(num / den)


def sum_rate(scenario: Scenario, allocation: Allocation, m: int) -> float:
    """Sum rate of users ``0..m`` (telescoped)."""
    _check_index(scenario, m)
    return scenario.bandwidth * math.log2(1.0 + received_power(scenario, allocation, m + 1))


def offload_time(scenario: Scenario, allocation: Allocation, m: int) -> float:
    bits = allocation.beta[m] * scenario.task_bits[m]
    if bits == 0:
        return 0.0
    r = rate(scenario, allocation, m)
    if r <= 0:
        return INF
    return float(bits / r)


def offload_energy(scenario: Scenario, allocation: Allocation, m: int) -> float:
    p = float(allocation.power[m])
    if p == 0.0:
        return 0.0
    return offload_time(scenario, allocation, m) * p


def local_time(scenario: Scenario, allocation: Allocation, m: int) -> float:
    _check_index(scenario, m)
    return float((1.0 - allocation.beta[m]) * scenario.local_only_times[m])


def local_energy(scenario: Scenario, allocation: Allocation, m: int) -> float:
    _check_index(scenario, m)
    return float((1.0 - allocation.beta[m]) * scenario.local_only_energy[m])


def completion_time(scenario: Scenario, allocation: Allocation, m: int) -> float:
    return max(offload_time(scenario, allocation, m), local_time(scenario, allocation, m))


def user_energy(scenario: Scenario, allocation: Allocation, m: int) -> float:
    return local_energy(scenario, allocation, m) + offload_energy(scenario, allocation, m)


def common_offload_time(scenario: Scenario, allocation: Allocation, m: int) -> float:
    """Offload time of users ``0..m`` when they all finish together."""
    bits = float(np.dot(allocation.beta[: m + 1], scenario.task_bits[: m + 1]))
    if bits == 0:
        return 0.0
    r = sum_rate(scenario, allocation, m)
    if r <= 0:
        return INF
    return bits / r


def objective(scenario: Scenario, allocation: Allocation) -> float:
    """Largest per-user completion time."""
    return max(completion_time(scenario, allocation, m) for m in range(scenario.num_users))


def make_scenario(
    task_bits: Sequence[float],
    cycles_per_bit: Sequence[float] | float,
    cpu_freq: Sequence[float] | float,
    cap_coeff: Sequence[float] | float,
    gains: Sequence[float],
    bandwidth: float,
    p_max: float,
    e_max: float,
) -> Scenario:
    """Build a scenario from per-user columns; scalars broadcast to every user.

    The columns must already be in ascending-gain order.
    """
    n = len(gains)

    def col(v):
        arr = np.broadcast_to(np.asarray(v, dtype=float), (n,))
        return [float(x) for x in arr]

    users = tuple(
        UserProfile(L, C, f, k, h)
        for L, C, f, k, h in zip(col(task_bits), col(cycles_per_bit), col(cpu_freq), col(cap_coeff), col(gains))
    )
    return Scenario(users, float(bandwidth), float(p_max), float(e_max))
