"""Minimum completion-time partial offloading over a NOMA uplink."""

from .baselines import local_only, noma_full_offload, ofdma_partial, ofdma_sum_rate
from .bss import InfeasibleScenarioError, SolveResult, SolverTag, TraceRow, initial_bounds, solve_bss
from .closed_form import ClosedFormError, ClosedFormSolution, solve_closed_form, solve_two_user
from .feasibility import FeasibilityConfig, FeasibilityOutcome, check_feasible, constraint_residuals
from .lambertw import lambert_w0, lambert_wm1
from .model import Allocation, Scenario, UserProfile, make_scenario
from .oracle import grid_search
from .scenarios import ScenarioParams, generate, noise_power

__all__ = [
    "Allocation",
    "ClosedFormError",
    "ClosedFormSolution",
    "FeasibilityConfig",
    "FeasibilityOutcome",
    "InfeasibleScenarioError",
    "Scenario",
    "ScenarioParams",
    "SolveResult",
    "SolverTag",
    "TraceRow",
    "UserProfile",
    "check_feasible",
    "constraint_residuals",
    "generate",
    "grid_search",
    "initial_bounds",
    "lambert_w0",
    "lambert_wm1",
    "local_only",
    "make_scenario",
    "noise_power",
    "noma_full_offload",
    "ofdma_partial",
    "ofdma_sum_rate",
    "solve_bss",
    "solve_closed_form",
    "solve_two_user",
]
