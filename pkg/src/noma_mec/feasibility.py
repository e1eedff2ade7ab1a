"""Feasibility of a candidate completion time.

For a fixed deadline ``alpha`` the constraint set over ``(beta, p)`` is
convex: offload constraints are linear minus concave, the local-time and
energy constraints are linear. ``check_feasible`` works in stages:

1. an analytic point (smallest admissible ``beta``, largest affordable power);
2. a capacity bound that rejects deadlines no allocation can meet;
3. with full-band sum rates, the exact maximizer of the offload slack, which
   decides feasibility outright;
4. otherwise projected gradient descent on a log-sum-exp smoothing of the
   largest normalized residual, with the smoothing tightened in stages and a
   linearization lower bound that certifies infeasibility early.

Residual vector layout (length ``7*M``), positive means violated::

    offload[M], local[M], energy[M], beta_low[M], beta_high[M], power_low[M], power_high[M]

Offload residual ``m`` compares the bits of users ``0..m`` with what the
deadline allows. By default the rate term is the full-band sum rate of all
users, so only the last offload residual can bind; ``nested_rates=True``
uses the sum rate of users ``0..m`` instead.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .model import Allocation, Scenario

LN2 = math.log(2.0)
BLOCKS = ("offload", "local", "energy", "beta_low", "beta_high", "power_low", "power_high")


class Status(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class FeasibilityConfig:
    eps_c: float = 1e-9
    max_iters: int = 5000
    tau: float = 1e-3
    # smoothing is tightened tenfold per stage down to this floor
    tau_min: float = 1e-7
    armijo_factor: float = 0.5
    armijo_slope: float = 1e-4
    nested_rates: bool = False
    # pins every beta to this value (1.0 gives the full-offloading scheme)
    fixed_beta: float | None = None


@dataclass(frozen=True)
class FeasibilityOutcome:
    status: Status
    witness: Allocation | None
    max_violation: float
    iterations_used: int
    phase: str = ""

    @property
    def feasible(self) -> bool:
        return self.status is Status.FEASIBLE


def residual_slices(num_users: int) -> dict[str, slice]:
    return {name: slice(i * num_users, (i + 1) * num_users) for i, name in enumerate(BLOCKS)}


class _Problem:
    """Residuals and Jacobian in scaled variables ``x = (beta, p / p_max)``."""

    def __init__(self, scenario: Scenario, alpha: float, nested: bool):
        self.M = M = scenario.num_users
        self.alpha = alpha
        self.nested = nested
        self.L = scenario.task_bits
        self.cum_L = np.cumsum(self.L)
        self.t_loc = scenario.local_only_times
        self.e_loc = scenario.local_only_energy
        self.E = scenario.e_max
        self.P = scenario.p_max
        self.hp = scenario.gains * self.P
        self.rate_scale = alpha * scenario.bandwidth
        self.tri = np.tril(np.ones((M, M))) if nested else np.ones((M, M))

    def received(self, u: np.ndarray) -> np.ndarray:
        hpu = self.hp * u
        return np.cumsum(hpu) if self.nested else np.full(self.M, hpu.sum())

    def residuals(self, x: np.ndarray) -> np.ndarray:
        M = self.M
        beta, u = x[:M], x[M:]
        bits = np.cumsum(beta * self.L)
        cap = self.rate_scale * np.log2(1.0 + self.received(u))
        off = (bits - cap) / self.cum_L
        loc = ((1.0 - beta) * self.t_loc - self.alpha) / self.alpha
        en = ((1.0 - beta) * self.e_loc + self.alpha * self.P * u - self.E) / self.E
        return np.concatenate((off, loc, en))

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        M = self.M
        u = x[M:]
        J = np.zeros((3 * M, 2 * M))
        J[:M, :M] = np.tril(np.ones((M, M))) * self.L / self.cum_L[:, None]
        coef = self.rate_scale / (LN2 * (1.0 + self.received(u)) * self.cum_L)
        J[:M, M:] = -self.tri * coef[:, None] * self.hp
        idx = np.arange(M)
        J[M + idx, idx] = -self.t_loc / self.alpha
        J[2 * M + idx, idx] = -self.e_loc / self.E
        J[2 * M + idx, M + idx] = self.alpha * self.P / self.E
        return J


def _as_x(problem: _Problem, allocation: Allocation) -> np.ndarray:
    u = allocation.power / problem.P if problem.P > 0 else np.zeros(problem.M)
    return np.concatenate((allocation.beta, u))


def _box_residuals(scenario: Scenario, allocation: Allocation) -> np.ndarray:
    scale = scenario.p_max if scenario.p_max > 0 else 1.0
    return np.concatenate(
        (
            -allocation.beta,
            allocation.beta - 1.0,
            -allocation.power / scale,
            (allocation.power - scenario.p_max) / scale,
        )
    )


def constraint_residuals(
    scenario: Scenario, alpha: float, allocation: Allocation, nested_rates: bool = False
) -> np.ndarray:
    """Normalized residual of every constraint at ``allocation`` (see module docstring)."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    problem = _Problem(scenario, alpha, nested_rates)
    if problem.P > 0:
        x = _as_x(problem, allocation)
        core = problem.residuals(x)
    else:
        # with p_max = 0 any positive power is a box violation; evaluate with the actual power
        x = np.concatenate((allocation.beta, np.zeros(problem.M)))
        core = problem.residuals(x)
        hpu = scenario.gains * allocation.power
        rec = np.cumsum(hpu) if nested_rates else np.full(problem.M, hpu.sum())
        bits = np.cumsum(allocation.beta * scenario.task_bits)
        core[: problem.M] = (bits - alpha * scenario.bandwidth * np.log2(1.0 + rec)) / problem.cum_L
        core[2 * problem.M :] += alpha * allocation.power / scenario.e_max
    return np.concatenate((core, _box_residuals(scenario, allocation)))


def _bounds(problem: _Problem, config: FeasibilityConfig) -> tuple[np.ndarray, np.ndarray]:
    M = problem.M
    lo = np.zeros(2 * M)
    hi = np.ones(2 * M)
    if config.fixed_beta is not None:
        lo[:M] = hi[:M] = config.fixed_beta
    if problem.P <= 0:
        hi[M:] = 0.0
    return lo, hi


def _seed(problem: _Problem, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    M = problem.M
    beta = np.clip(1.0 - problem.alpha / problem.t_loc, lo[:M], hi[:M])
    with np.errstate(divide="ignore", invalid="ignore"):
        beta_energy = np.where(problem.e_loc > 0, 1.0 - problem.E / problem.e_loc, 0.0)
    beta = np.clip(np.maximum(beta, beta_energy), lo[:M], hi[:M])
    if problem.P > 0:
        budget = (problem.E - (1.0 - beta) * problem.e_loc) / problem.alpha
        u = np.clip(budget / problem.P, lo[M:], hi[M:])
    else:
        u = np.zeros(M)
    return np.concatenate((beta, u))


def _capacity_bound_violation(problem: _Problem, x_seed: np.ndarray) -> float:
    """Lower bound on the largest offload residual over the whole box.

    Uses the smallest admissible bits (seed beta is componentwise minimal)
    against the largest conceivable powers ``min(p_max, E/alpha)``.
    """
    M = problem.M
    u_max = np.full(M, min(1.0, problem.E / (problem.alpha * problem.P)) if problem.P > 0 else 0.0)
    bits = np.cumsum(x_seed[:M] * problem.L)
    cap = problem.rate_scale * np.log2(1.0 + problem.received(u_max))
    return float(np.max((bits - cap) / problem.cum_L))


def _max_slack_sum_form(problem: _Problem, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Exact maximizer of ``alpha*B*log2(1 + sum h p) - sum beta L`` under the per-user constraints.

    Only valid when every offload row uses the full sum rate. Each user then
    spends all energy not used locally on transmission, ``u = min(1, (E - (1-beta) e) / (alpha P))``,
    and the objective is concave in ``beta`` with a common marginal
    ``lam = alpha*B / (ln2 (1 + S))``. Users are raised from their lowest
    admissible ``beta`` in order of the threshold ``L alpha / (h e)`` until
    ``lam`` falls below the next threshold.
    """
    M, a, P, E = problem.M, problem.alpha, problem.P, problem.E
    e = problem.e_loc
    # lowest beta meeting the local deadline and leaving non-negative energy for transmission
    with np.errstate(divide="ignore"):
        b_energy = np.where(e > 0, 1.0 - E / e, -np.inf)
    b = np.clip(np.maximum(lo[:M], np.maximum(1.0 - a / problem.t_loc, b_energy)), lo[:M], hi[:M])
    if P <= 0:
        return np.concatenate((b, np.zeros(M)))

    def power(beta):
        return np.clip((E - (1.0 - beta) * e) / (a * P), lo[M:], hi[M:])

    # beta beyond which transmission is capped by p_max
    with np.errstate(divide="ignore"):
        b_sat = np.where(e > 0, 1.0 - (E - a * P) / e, b)
    b_sat = np.clip(b_sat, b, hi[:M])
    beta = b.copy()
    S = float(np.dot(problem.hp, power(beta)))
    gain = problem.hp * e / (a * P)  # dS/dbeta while unsaturated
    movable = np.flatnonzero((b_sat > b) & (gain > 0))
    theta = problem.L[movable] / gain[movable]
    scale = problem.rate_scale / LN2
    for k in movable[np.argsort(theta, kind="stable")]:
        th = problem.L[k] / gain[k]
        if scale / (1.0 + S) <= th:
            break
        full = S + gain[k] * (b_sat[k] - beta[k])
        if scale / (1.0 + full) >= th:
            beta[k], S = b_sat[k], full
            continue
        beta[k] += (scale / th - 1.0 - S) / gain[k]
        break
    return np.concatenate((beta, power(beta)))


def _smoothed(r: np.ndarray, tau: float) -> tuple[float, np.ndarray]:
    top = r.max()
    z = np.exp((r - top) / tau)
    s = z.sum()
    return top + tau * math.log(s), z / s


def check_feasible(scenario: Scenario, alpha: float, config: FeasibilityConfig = FeasibilityConfig()) -> FeasibilityOutcome:
    """Decide whether some allocation meets completion time ``alpha``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    problem = _Problem(scenario, alpha, config.nested_rates)
    M = problem.M
    lo, hi = _bounds(problem, config)

    def witness(x):
        return Allocation(x[:M].copy(), x[M:] * problem.P)

    x = _seed(problem, lo, hi)
    r = problem.residuals(x)
    best_x, best = x, float(r.max())
    if best <= config.eps_c:
        return FeasibilityOutcome(Status.FEASIBLE, witness(x), best, 0, "seed")
    if config.fixed_beta is None or config.fixed_beta == 1.0:
        bound = _capacity_bound_violation(problem, x)
        if bound > config.eps_c:
            return FeasibilityOutcome(Status.INFEASIBLE, None, max(best, bound), 0, "bound")
    if not config.nested_rates:
        # local-time and energy rows are met by construction, so the offload row decides
        x = _max_slack_sum_form(problem, lo, hi)
        top = float(problem.residuals(x).max())
        status = Status.FEASIBLE if top <= config.eps_c else Status.INFEASIBLE
        return FeasibilityOutcome(status, witness(x) if top <= config.eps_c else None, top, 0, "exact")

    n_log = math.log(r.size)
    # diagonal scaling by squared Jacobian column norms keeps steep rows from throttling the step
    col = np.square(problem.jacobian(x)).sum(axis=0)
    scale = 1.0 / np.where(col > 0, col, 1.0)
    tau = config.tau
    step = 1.0
    iters = 0
    while iters < config.max_iters:
        F, w = _smoothed(r, tau)
        g = problem.jacobian(x).T @ w
        # convexity: F(y) >= F(x) + g.(y - x) on the box, and max r >= F - tau*log(n)
        lin = np.minimum(g * (lo - x), g * (hi - x)).sum()
        if F + lin - tau * n_log > config.eps_c:
            return FeasibilityOutcome(Status.INFEASIBLE, None, best, iters, "certified")
        if -lin <= 0.1 * tau:
            if tau <= config.tau_min:
                break
            tau = max(tau * 0.1, config.tau_min)
            continue
        step = min(step * 2.0, 1e6)
        while True:
            iters += 1
            x_new = np.clip(x - step * scale * g, lo, hi)
            r_new = problem.residuals(x_new)
            F_new, _ = _smoothed(r_new, tau)
            if F_new <= F + config.armijo_slope * g @ (x_new - x) or step < 1e-16:
                break
            step *= config.armijo_factor
            if iters >= config.max_iters:
                break
        x, r = x_new, r_new
        top = float(r.max())
        if top < best:
            best_x, best = x, top
        if best <= config.eps_c:
            return FeasibilityOutcome(Status.FEASIBLE, witness(best_x), best, iters, "descent")
        if step < 1e-16:
            if tau <= config.tau_min:
                break
            tau = max(tau * 0.1, config.tau_min)
            step = 1.0
    return FeasibilityOutcome(Status.INFEASIBLE, None, best, iters, "exhausted")
