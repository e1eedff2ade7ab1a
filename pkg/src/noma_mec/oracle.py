"""Brute-force grid search over offloading fractions and powers.

Works on the per-user model directly: each user has its own SIC rate,
offload time ``beta L / R`` and energy ``(1 - beta) kappa L C f^2 + p * beta L / R``.
Nothing from the equal-time reformulation is used, so agreement with the
bisection solver is an independent check.

For a fixed power vector the rates are fixed and the users decouple: the
best objective is ``max_m min_beta g_m(beta)``. So the search loops over the
``r**M`` power points and handles every user's ``r`` fractions at once.
"""

from __future__ import annotations

import itertools

import numpy as np

from .bss import InfeasibleScenarioError, SolveResult, SolverTag
from .model import Allocation, Scenario, objective

MAX_USERS = 3
MIN_RESOLUTION = 11


def default_resolution(num_users: int) -> int:
    return 101 if num_users <= 2 else 31


def _sic_rates(scenario: Scenario, powers: np.ndarray) -> np.ndarray:
    """Rates for a stack of power vectors, shape ``(K, M)``."""
    rx = powers * scenario.gains
    interference = np.cumsum(rx, axis=1) - rx
    return scenario.bandwidth * np.log2(1.0 + rx / (1.0 + interference))


def _user_tables(scenario: Scenario, powers: np.ndarray, betas: np.ndarray):
    """Completion time and feasibility for every (power point, user, beta)."""
    rates = _sic_rates(scenario, powers)[:, :, None]  # (K, M, 1)
    bits = betas[None, None, :] * scenario.task_bits[None, :, None]  # (1, M, r)
    p = powers[:, :, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        t_off = np.where(bits == 0, 0.0, bits / rates)
        t_off = np.where(np.isnan(t_off), np.inf, t_off)
        e_tx = np.where(p == 0, 0.0, t_off * p)
    t_loc = (1.0 - betas)[None, None, :] * scenario.local_only_times[None, :, None]
    energy = (1.0 - betas)[None, None, :] * scenario.local_only_energy[None, :, None] + e_tx
    return np.maximum(t_off, t_loc), energy <= scenario.e_max


def _cell_tolerance(scenario: Scenario, beta: np.ndarray, power: np.ndarray, steps: tuple[float, float]) -> float:
    """Sum over coordinates of the largest objective change from a one-step move."""
    base = objective(scenario, Allocation(beta, power))
    total = 0.0
    for which, vec, step, upper in ((0, beta, steps[0], 1.0), (1, power, steps[1], scenario.p_max)):
        for m in range(scenario.num_users):
            worst = 0.0
            for sign in (-1.0, 1.0):
                moved = vec.copy()
                moved[m] = min(max(moved[m] + sign * step, 0.0), upper)
                alloc = Allocation(moved, power) if which == 0 else Allocation(beta, moved)
                delta = abs(objective(scenario, alloc) - base)
                if np.isfinite(delta):
                    worst = max(worst, delta)
            total += worst
    return total


def grid_search(scenario: Scenario, resolution: int | None = None) -> SolveResult:
    """Best feasible grid point; ties go to the lexicographically smallest (powers, fractions) index."""
    M = scenario.num_users
    if M > MAX_USERS:
        raise ValueError(f"grid search supports at most {MAX_USERS} users, got {M}")
    r = default_resolution(M) if resolution is None else int(resolution)
    if r < MIN_RESOLUTION:
        raise ValueError(f"resolution must be at least {MIN_RESOLUTION}")
    betas = np.linspace(0.0, 1.0, r)
    levels = np.linspace(0.0, scenario.p_max, r)
    powers = np.array(list(itertools.product(levels, repeat=M)))  # lexicographic in the power indices

    times, ok = _user_tables(scenario, powers, betas)
    best_per_user = np.where(ok, times, np.inf).min(axis=2)  # (K, M)
    values = best_per_user.max(axis=1)
    k = int(np.argmin(values))
    alpha = float(values[k])
    if not np.isfinite(alpha):
        raise InfeasibleScenarioError("no feasible grid point")
    # smallest fraction index per user that keeps the point at the optimum
    pick = np.argmax(ok[k] & (times[k] <= alpha), axis=1)
    beta = betas[pick]
    power = powers[k].copy()
    steps = (betas[1] - betas[0], levels[1] - levels[0])
    tol = _cell_tolerance(scenario, beta, power, steps)
    return SolveResult(alpha, Allocation(beta, power), SolverTag.ORACLE, (),
                       {"resolution": r, "cell_tolerance": tol})
