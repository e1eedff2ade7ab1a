"""Closed-form optimum for two users.

When both users finish offloading and local computing at the same instant,
the completion time depends on the powers only through the received power
``q = h1 p1 + h2 p2``::

    alpha(q) = a1 / (b1 + B log2(1 + q)),  a1 = L1 + L2,  b1 = f1/C1 + f2/C2

and user ``m``'s energy budget reads ``p_m <= E/alpha(q) - kappa_m f_m^3``.
The optimum pushes ``q`` as high as the power box and both energy budgets
allow; which of them bind gives the four cases. An energy budget taken with
equality solves ``1 + s + g p = 2**(A + Bc p)`` for ``p``, whose upper root
is ``-W_{-1}(z)/(Bc ln2) - (1+s)/g``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .bss import DEFAULT_EPSILON, SolveResult, SolverTag, solve_bss
from .feasibility import FeasibilityConfig
from .lambertw import lambert_wm1
from .model import Allocation, Scenario

LN2 = math.log(2.0)
CROSS_CHECK_TOL = 1e-10
# slack when comparing a boundary power with p_max, so ties go to the earlier case
TIE_TOL = 1e-12


class Case(enum.IntEnum):
    CORNER = 1  # both budgets slack, p = (P, P)
    USER2_BINDS = 2  # p1 = P, p2 on its energy boundary
    USER1_BINDS = 3  # p2 = P, p1 on its energy boundary
    BOTH_BIND = 4


class ClosedFormError(RuntimeError):
    """The equal-time solution does not exist for this scenario; use bisection instead."""


class NoEnergyRootError(ClosedFormError):
    """The energy equality has no real root: the budget fails for every power."""


class CrossCheckError(RuntimeError):
    """Lambert-W power disagrees with a bracketing root-finder."""


@dataclass(frozen=True)
class TwoUserConstants:
    a1: float
    b1: float
    A1: float
    A2: float
    Bc: float  # shared by both users
    h1: float
    h2: float
    local_energy_rate: tuple[float, float]  # kappa_m f_m^3, watts

    @classmethod
    def of(cls, scenario: Scenario) -> "TwoUserConstants":
        if scenario.num_users != 2:
            raise ValueError(f"closed form needs exactly 2 users, got {scenario.num_users}")
        L, C, f, k = scenario.task_bits, scenario.cycles_per_bit, scenario.cpu_freq, scenario.cap_coeff
        B, E = scenario.bandwidth, scenario.e_max
        a1 = float(L.sum())
        b1 = float((f / C).sum())
        kf3 = k * f**3
        return cls(
            a1=a1,
            b1=b1,
            A1=float(kf3[0] * a1 / (E * B) - b1 / B),
            A2=float(kf3[1] * a1 / (E * B) - b1 / B),
            Bc=a1 / (E * B),
            h1=float(scenario.gains[0]),
            h2=float(scenario.gains[1]),
            local_energy_rate=(float(kf3[0]), float(kf3[1])),
        )


@dataclass(frozen=True)
class ClosedFormSolution:
    case_id: Case
    p1: float
    p2: float
    beta1: float
    beta2: float
    alpha: float

    @property
    def allocation(self) -> Allocation:
        return Allocation([self.beta1, self.beta2], [self.p1, self.p2])


def transformed_objective(scenario: Scenario, p1: float, p2: float) -> float:
    c = TwoUserConstants.of(scenario)
    return c.a1 / (c.b1 + scenario.bandwidth * math.log2(1.0 + c.h1 * p1 + c.h2 * p2))


def energy_cap(scenario: Scenario, m: int, q: float) -> float:
    """Largest power user ``m`` can afford when the received power is ``q``."""
    c = TwoUserConstants.of(scenario)
    return scenario.e_max * (c.b1 + scenario.bandwidth * math.log2(1.0 + q)) / c.a1 - c.local_energy_rate[m]


def _wm1_of_log(ell: float) -> float:
    """``W-1(-exp(ell))`` for very negative ``ell``, where ``exp`` underflows.

    Solves ``w + ln(-w) = ell`` by Newton's method.
    """
    w = ell - math.log(-ell)
    for _ in range(50):
        dw = (w + math.log(-w) - ell) / (1.0 + 1.0 / w)
        w -= dw
        if abs(dw) <= 1e-16 * abs(w):
            break
    return w


def _lambert_root(A: float, Bc: float, gain: float, offset: float) -> float:
    """Upper root ``p`` of ``1 + offset + gain*p = 2**(A + Bc*p)``."""
    shift = (1.0 + offset) / gain
    log_neg_z = math.log(Bc * LN2 / gain) + LN2 * (A - Bc * shift)
    if log_neg_z > -1.0:
        # z = -1/e up to rounding still has the double root -1
        if log_neg_z - (-1.0) > 1e-14:
            raise NoEnergyRootError(f"energy equality has no real root (ln(-z) = {log_neg_z!r} > -1)")
        w = -1.0
    elif log_neg_z > -700.0:
        w = lambert_wm1(-math.exp(log_neg_z))
    else:
        w = _wm1_of_log(log_neg_z)
    return -w / (Bc * LN2) - shift


def _bracket_root(A: float, Bc: float, gain: float, offset: float) -> float:
    """Same root by bracketing on ``log2(1 + offset + gain p) - A - Bc p``."""

    def g(p):
        return math.log2(1.0 + offset + gain * p) - A - Bc * p

    peak = (gain / (Bc * LN2) - (1.0 + offset)) / gain
    lo = max(peak, -(1.0 + offset) / gain * (1.0 - 1e-12))
    if g(lo) < 0:
        raise NoEnergyRootError("energy equality has no real root")
    step = max(abs(lo), 1.0 / (Bc * LN2), 1e-12)
    hi = lo + step
    while g(hi) > 0:
        step *= 2.0
        hi = lo + step
    return brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def _checked_root(A: float, Bc: float, gain: float, offset: float, scale: float) -> float:
    p = _lambert_root(A, Bc, gain, offset)
    ref = _bracket_root(A, Bc, gain, offset)
    # the root is a difference of two terms of size |shift|; allow for that cancellation
    shift = abs((1.0 + offset) / gain)
    tol = CROSS_CHECK_TOL * max(abs(p), abs(ref), scale) + 16 * np.finfo(float).eps * shift
    if abs(p - ref) > tol:
        raise CrossCheckError(
            f"Lambert-W root {p!r} disagrees with bracketing root {ref!r} "
            f"(A={A!r}, Bc={Bc!r}, gain={gain!r}, offset={offset!r})"
        )
    return p


def p1_boundary(scenario: Scenario, p2: float) -> float:
    """Power of user 1 that spends its energy budget exactly, given ``p2``."""
    c = TwoUserConstants.of(scenario)
    return _checked_root(c.A1, c.Bc, c.h1, c.h2 * p2, scenario.p_max)


def p2_boundary(scenario: Scenario, p1: float) -> float:
    """Power of user 2 that spends its energy budget exactly, given ``p1``."""
    c = TwoUserConstants.of(scenario)
    return _checked_root(c.A2, c.Bc, c.h2, c.h1 * p1, scenario.p_max)


def both_binding_powers(scenario: Scenario) -> tuple[float, float]:
    """Powers with both budgets tight; they differ by the local energy rates."""
    c = TwoUserConstants.of(scenario)
    delta = c.local_energy_rate[1] - c.local_energy_rate[0]
    p2 = _checked_root(c.A2, c.Bc, c.h1 + c.h2, c.h1 * delta, scenario.p_max)
    return p2 + delta, p2


def _in_box(p: float, P: float) -> bool:
    return -TIE_TOL * max(P, 1.0) <= p <= P * (1.0 + TIE_TOL)


def _select_case(scenario: Scenario) -> tuple[Case, float, float]:
    P = scenario.p_max
    c = TwoUserConstants.of(scenario)
    corner = (c.h1 + c.h2) * P
    slack = [energy_cap(scenario, m, corner) >= P * (1.0 - TIE_TOL) for m in (0, 1)]
    if all(slack):
        return Case.CORNER, P, P

    def attempt(fn):
        try:
            return fn()
        except NoEnergyRootError:
            return None

    if slack[0]:
        p2 = attempt(lambda: p2_boundary(scenario, P))
        if p2 is not None and _in_box(p2, P) and energy_cap(scenario, 0, c.h1 * P + c.h2 * p2) >= P * (1.0 - TIE_TOL):
            return Case.USER2_BINDS, P, p2
    if slack[1]:
        p1 = attempt(lambda: p1_boundary(scenario, P))
        if p1 is not None and _in_box(p1, P) and energy_cap(scenario, 1, c.h1 * p1 + c.h2 * P) >= P * (1.0 - TIE_TOL):
            return Case.USER1_BINDS, p1, P
    powers = attempt(lambda: both_binding_powers(scenario))
    if powers is not None and all(_in_box(p, P) for p in powers):
        return Case.BOTH_BIND, *powers
    raise ClosedFormError("no case yields powers inside the box; the equal-time solution does not exist")


def _check_split_optimal(scenario: Scenario, powers: tuple[float, float]) -> None:
    """Offloading one more unit of bits frees local energy ``e/L`` per bit.

    For a user whose power is energy-limited that energy raises the sum
    rate; the equal-time split is optimal only if the extra capacity does
    not exceed the extra bits.
    """
    q = float(np.dot(scenario.gains, powers))
    for m, p in enumerate(powers):
        if p >= scenario.p_max * (1.0 - TIE_TOL):
            continue
        gain = scenario.bandwidth * scenario.gains[m] * scenario.local_only_energy[m] / (LN2 * (1.0 + q))
        if gain > scenario.task_bits[m] * (1.0 + 1e-9):
            raise ClosedFormError(
                f"user {m + 1} gains {gain / scenario.task_bits[m]:.4g} bits of capacity per extra offloaded bit; "
                "the equal-time split is not optimal"
            )


def solve_two_user(scenario: Scenario) -> ClosedFormSolution:
    """Optimal powers, offloading fractions and completion time for ``M = 2``.

    Raises ``ClosedFormError`` when the equal-time structure is not the
    optimum: an energy budget is unreachable, a recovered fraction leaves
    [0, 1], or an energy-limited user would gain by offloading more than
    its local deadline requires.
    """
    case, p1, p2 = _select_case(scenario)
    P = scenario.p_max
    p1 = min(max(p1, 0.0), P)
    p2 = min(max(p2, 0.0), P)
    alpha = transformed_objective(scenario, p1, p2)
    # finishing locally at alpha fixes each offloaded fraction
    betas = 1.0 - alpha / scenario.local_only_times
    if np.any(betas < -TIE_TOL) or np.any(betas > 1.0 + TIE_TOL):
        raise ClosedFormError(f"recovered offloading fractions {betas.tolist()} leave [0, 1]")
    betas = np.clip(betas, 0.0, 1.0)
    _check_split_optimal(scenario, (p1, p2))
    return ClosedFormSolution(case, p1, p2, float(betas[0]), float(betas[1]), alpha)


def solve_closed_form(
    scenario: Scenario,
    epsilon: float = DEFAULT_EPSILON,
    config: FeasibilityConfig = FeasibilityConfig(),
) -> SolveResult:
    """Closed form as a ``SolveResult``, falling back to bisection when it does not apply."""
    try:
        sol = solve_two_user(scenario)
    except ClosedFormError as exc:
        res = solve_bss(scenario, epsilon, config)
        return SolveResult(res.alpha_star, res.allocation, SolverTag.CLOSED_FORM, res.trace,
                           {"case": 0, "fallback": "bss", "reason": str(exc)})
    return SolveResult(sol.alpha, sol.allocation, SolverTag.CLOSED_FORM, (), {"case": int(sol.case_id)})
