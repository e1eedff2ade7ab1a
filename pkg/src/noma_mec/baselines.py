"""Reference schemes: fully local computing, NOMA full offloading, OFDMA partial offloading."""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .bss import DEFAULT_EPSILON, InfeasibleScenarioError, SolveResult, SolverTag, bisect, solve_bss
from .feasibility import FeasibilityConfig, check_feasible
from .model import INF, Allocation, Scenario, UserProfile

MAX_DOUBLINGS = 64


def local_only(scenario: Scenario) -> SolveResult:
    """Nothing offloaded; the slowest user sets the completion time."""
    alpha = float(scenario.local_only_times.max())
    within_budget = bool(np.all(scenario.local_only_energy <= scenario.e_max))
    return SolveResult(alpha, Allocation.zeros(scenario.num_users), SolverTag.LOCAL, (),
                       {"energy_feasible": within_budget})


def noma_full_offload(
    scenario: Scenario,
    epsilon: float = DEFAULT_EPSILON,
    config: FeasibilityConfig = FeasibilityConfig(),
) -> SolveResult:
    """Every task sent in full over the shared band, bisecting on the common time.

    The search starts from the full-power lower bound ``sum L / (B log2(1 + sum h P))``
    and doubles until feasible. Returns ``alpha_star = inf`` with no allocation
    when no finite time works (e.g. ``p_max = 0`` or too little energy).
    """
    config = replace(config, fixed_beta=1.0)
    total_rate = scenario.bandwidth * math.log2(1.0 + float(np.dot(scenario.gains, np.full(scenario.num_users, scenario.p_max))))
    if total_rate <= 0:
        return SolveResult(INF, None, SolverTag.FULL_OFFLOAD, (), {"reason": "no transmit power"})
    lo = float(scenario.task_bits.sum()) / total_rate
    hi = lo
    for _ in range(MAX_DOUBLINGS):
        out = check_feasible(scenario, hi, config)
        if out.feasible:
            break
        lo, hi = hi, 2.0 * hi
    else:
        return SolveResult(INF, None, SolverTag.FULL_OFFLOAD, (), {"reason": "energy budget too small"})
    if hi == lo:
        return SolveResult(hi, out.witness, SolverTag.FULL_OFFLOAD, (), {"lo": lo, "hi": hi})

    def check(alpha):
        res = check_feasible(scenario, alpha, config)
        return res.feasible, res.witness

    lo, hi, witness, trace = bisect(check, lo, hi, epsilon, out.witness)
    return SolveResult(0.5 * (lo + hi), witness, SolverTag.FULL_OFFLOAD, trace, {"lo": lo, "hi": hi})


def ofdma_subband(scenario: Scenario, m: int) -> Scenario:
    """User ``m`` alone on a ``1/M`` share of the band.

    Noise scales with the share, so the noise-normalized gain grows by ``M``.
    """
    M = scenario.num_users
    u = scenario.users[m]
    user = UserProfile(u.task_bits, u.cycles_per_bit, u.cpu_freq, u.cap_coeff, u.channel_gain * M)
    return Scenario((user,), scenario.bandwidth / M, scenario.p_max, scenario.e_max)


def ofdma_partial(
    scenario: Scenario,
    epsilon: float = DEFAULT_EPSILON,
    config: FeasibilityConfig = FeasibilityConfig(),
) -> SolveResult:
    """Each user solves its own partial-offloading problem on an orthogonal subband."""
    results = []
    for m in range(scenario.num_users):
        try:
            results.append(solve_bss(ofdma_subband(scenario, m), epsilon, config))
        except InfeasibleScenarioError as exc:
            raise InfeasibleScenarioError(f"OFDMA subband of user {m}: {exc}") from exc
    alphas = [r.alpha_star for r in results]
    worst = int(np.argmax(alphas))
    beta = [r.allocation.beta[0] for r in results]
    power = [r.allocation.power[0] for r in results]
    return SolveResult(alphas[worst], Allocation(beta, power), SolverTag.OFDMA, results[worst].trace,
                       {"bottleneck_user": worst, "user_alphas": tuple(alphas)})


def ofdma_sum_rate(scenario: Scenario, powers) -> float:
    """Sum of per-subband rates with the band split equally."""
    M = scenario.num_users
    p = np.asarray(powers, dtype=float)
    return float(np.sum(scenario.bandwidth / M * np.log2(1.0 + M * scenario.gains * p)))
