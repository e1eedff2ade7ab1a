"""Bisection search on the common completion time."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .feasibility import FeasibilityConfig, check_feasible
from .model import Allocation, Scenario

DEFAULT_EPSILON = 1e-4


class SolverTag(enum.Enum):
    BSS = "bss"
    CLOSED_FORM = "closed2"
    ORACLE = "oracle"
    OFDMA = "ofdma"
    FULL_OFFLOAD = "full"
    LOCAL = "local"


class InfeasibleScenarioError(RuntimeError):
    """No allocation meets the constraints even at the largest candidate time."""


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    lo: float
    hi: float
    mid: float
    feasible: bool


@dataclass(frozen=True)
class SolveResult:
    alpha_star: float
    allocation: Allocation | None
    solver_tag: SolverTag
    trace: tuple[TraceRow, ...] = field(default_factory=tuple)
    extra: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return len(self.trace)


def initial_bounds(scenario: Scenario) -> tuple[float, float]:
    return 0.0, float(scenario.local_only_times.max())


def iteration_count(lo: float, hi: float, epsilon: float) -> int:
    """Number of halvings until the bracket is no wider than ``epsilon``."""
    if hi - lo <= epsilon:
        return 0
    n = math.ceil(math.log2((hi - lo) / epsilon))
    # guard against log2 rounding right at a power of two
    while (hi - lo) / 2.0**n > epsilon:
        n += 1
    while n > 0 and (hi - lo) / 2.0 ** (n - 1) <= epsilon:
        n -= 1
    return n


def bisect(check, lo: float, hi: float, epsilon: float, hi_witness=None):
    """Shrink ``[lo, hi]`` on a monotone predicate; ``hi`` must already be feasible.

    ``check(alpha)`` returns ``(feasible, witness)``. Returns the final
    bracket, the witness at the final ``hi`` and the trace.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    witness = hi_witness
    trace = []
    for it in range(1, iteration_count(lo, hi, epsilon) + 1):
        mid = 0.5 * (lo + hi)
        ok, w = check(mid)
        trace.append(TraceRow(it, lo, hi, mid, ok))
        if ok:
            hi, witness = mid, w
        else:
            lo = mid
    return lo, hi, witness, tuple(trace)


def solve_bss(
    scenario: Scenario,
    epsilon: float = DEFAULT_EPSILON,
    config: FeasibilityConfig = FeasibilityConfig(),
) -> SolveResult:
    """Globally minimize the largest completion time by bisection.

    Raises ``InfeasibleScenarioError`` when the local-only deadline itself is
    infeasible, which happens when finishing locally would exceed the energy
    budget and offloading cannot make up for it.
    """
    lo, hi = initial_bounds(scenario)
    top = check_feasible(scenario, hi, config)
    if not top.feasible:
        raise InfeasibleScenarioError(
            f"no feasible allocation at alpha={hi!r} (max violation {top.max_violation:.3e})"
        )

    def check(alpha):
        out = check_feasible(scenario, alpha, config)
        return out.feasible, out.witness

    lo, hi, witness, trace = bisect(check, lo, hi, epsilon, top.witness)
    return SolveResult(0.5 * (lo + hi), witness, SolverTag.BSS, trace, {"lo": lo, "hi": hi})
