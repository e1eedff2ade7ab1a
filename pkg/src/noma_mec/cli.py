"""``noma-mec`` command line: solve one scenario, sweep a parameter, dump a bisection trace.

Exit codes: 0 success, 2 bad input, 3 infeasible scenario (report still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .baselines import local_only, noma_full_offload, ofdma_partial, ofdma_sum_rate
from .bss import InfeasibleScenarioError, SolveResult, SolverTag, solve_bss
from .closed_form import solve_closed_form
from .config import ConfigError, ExperimentConfig, load_config, validate
from .model import Scenario, offload_energy
from .oracle import grid_search
from .scenarios import generate

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 2, 3
SOLVERS = [t.value for t in SolverTag]
SWEEP_COLUMNS = ["value", "solver", "seed", "alpha_star", "sum_rate_at_opt", "total_energy", "iterations"]


class UsageError(Exception):
    pass


def run_solver(name: str, scenario: Scenario, cfg: ExperimentConfig) -> SolveResult:
    eps, feas = cfg.epsilon, cfg.feasibility
    if name == "bss":
        return solve_bss(scenario, eps, feas)
    if name == "closed2":
        if scenario.num_users != 2:
            raise UsageError(f"closed2 needs M=2, got M={scenario.num_users}")
        return solve_closed_form(scenario, eps, feas)
    if name == "oracle":
        if scenario.num_users > 3:
            raise UsageError(f"oracle supports M<=3, got M={scenario.num_users}")
        return grid_search(scenario)
    if name == "ofdma":
        return ofdma_partial(scenario, eps, feas)
    if name == "full":
        return noma_full_offload(scenario, eps, feas)
    if name == "local":
        return local_only(scenario)
    raise UsageError(f"unknown solver {name!r}")


def sum_rate_at(scenario: Scenario, result: SolveResult) -> float:
    """Offloading rate of the scheme at its solution (0 without an allocation)."""
    if result.allocation is None:
        return 0.0
    p = result.allocation.power
    if result.solver_tag is SolverTag.OFDMA:
        return ofdma_sum_rate(scenario, p)
    return scenario.bandwidth * math.log2(1.0 + float(np.dot(scenario.gains, p)))


def total_energy(scenario: Scenario, result: SolveResult) -> float:
    """Energy charged as in each scheme's constraints.

    Local computing plus transmit power held for the offload duration: the
    common completion time for NOMA schemes, each user's own time for OFDMA,
    and the per-user offload time for the grid oracle.
    """
    a = result.allocation
    if a is None:
        return math.nan
    local = (1.0 - a.beta) * scenario.local_only_energy
    if result.solver_tag is SolverTag.ORACLE:
        tx = np.array([offload_energy(scenario, a, m) for m in range(scenario.num_users)])
    elif result.solver_tag is SolverTag.OFDMA:
        tx = np.asarray(result.extra["user_alphas"]) * a.power
    else:
        tx = result.alpha_star * a.power
    return float(np.sum(local + tx))


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def format_record(solver: str, cfg: ExperimentConfig, seed: int, scenario: Scenario, result: SolveResult) -> str:
    rows = [
        ("schema_version", SCHEMA_VERSION),
        ("status", "ok"),
        ("solver", solver),
        ("seed", seed),
        ("M", scenario.num_users),
        ("epsilon", cfg.epsilon),
        ("gains", ", ".join(_fmt(g) for g in scenario.gains)),
        ("alpha_star", result.alpha_star),
    ]
    a = result.allocation
    if a is not None:
        rows.append(("beta", ", ".join(_fmt(b) for b in a.beta)))
        rows.append(("p", ", ".join(_fmt(p) for p in a.power)))
    rows.append(("sum_rate_at_opt", sum_rate_at(scenario, result)))
    rows.append(("total_energy", total_energy(scenario, result)))
    rows.append(("iterations", result.iterations))
    for key in sorted(result.extra):
        value = result.extra[key]
        if isinstance(value, tuple):
            value = ", ".join(_fmt(v) for v in value)
        rows.append((f"extra.{key}", value))
    for row in result.trace:
        rows.append((f"trace.{row.iteration}", ", ".join(_fmt(v) for v in (row.lo, row.hi, row.mid, row.feasible))))
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in rows)


def _write(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    scenario = generate(seed, cfg.M, cfg.params)
    try:
        result = run_solver(args.solver, scenario, cfg)
    except InfeasibleScenarioError as exc:
        _write(f"schema_version = {SCHEMA_VERSION}\nstatus = infeasible\nsolver = {args.solver}\n"
               f"seed = {seed}\nM = {cfg.M}\nreason = {exc}\n", args.out)
        return EXIT_INFEASIBLE
    _write(format_record(args.solver, cfg, seed, scenario, result), args.out)
    return EXIT_OK


def _apply(cfg: ExperimentConfig, vary: str, value: float) -> ExperimentConfig:
    if vary == "p_max":
        return replace(cfg, params=cfg.params.replace(p_max=value))
    if vary == "e_max":
        return replace(cfg, params=cfg.params.replace(e_max=value))
    if vary == "L":
        return replace(cfg, params=cfg.params.replace(task_bits=(value,)))
    if vary == "M":
        if not float(value).is_integer() or value < 1:
            raise UsageError(f"M must be a positive integer, got {value!r}")
        return replace(cfg, M=int(value))
    raise UsageError(f"cannot vary {vary!r}")


def _sweep_row(job):
    """One (value, solver, seed) cell; runs in a worker process."""
    cfg, solver, seed = job
    scenario = generate(seed, cfg.M, cfg.params)
    try:
        res = run_solver(solver, scenario, cfg)
    except InfeasibleScenarioError:
        return math.inf, math.nan, math.nan, 0, True
    return res.alpha_star, sum_rate_at(scenario, res), total_energy(scenario, res), res.iterations, False


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    values = [float(v) for v in args.values.split(",") if v.strip()] if args.values else []
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    if not values:
        raise UsageError("--values is empty")
    if not solvers or any(s not in SOLVERS for s in solvers):
        raise UsageError(f"--solvers must be drawn from {SOLVERS}")
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    seed0 = cfg.seed if args.seed is None else args.seed
    seeds = list(range(seed0, seed0 + args.trials))
    jobs, keys = [], []
    for value in values:
        vcfg = _apply(cfg, args.vary, value)
        validate(vcfg)
        for solver in solvers:
            if solver == "closed2" and vcfg.M != 2:
                raise UsageError("closed2 needs M=2")
            if solver == "oracle" and vcfg.M > 3:
                raise UsageError("oracle supports M<=3")
            for seed in seeds:
                jobs.append((vcfg, solver, seed))
                keys.append((value, solver, seed))
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            outcomes = list(pool.map(_sweep_row, jobs, chunksize=max(1, len(jobs) // (4 * args.workers))))
    else:
        outcomes = [_sweep_row(job) for job in jobs]

    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    if args.average:
        n = len(seeds)
        for i in range(0, len(outcomes), n):
            block = outcomes[i : i + n]
            value, solver, _ = keys[i]
            mean = [float(np.mean([o[j] for o in block])) for j in range(4)]
            writer.writerow([_fmt(value), solver, f"mean{n}", *(_fmt(x) for x in mean)])
    else:
        for (value, solver, seed), o in zip(keys, outcomes):
            writer.writerow([_fmt(value), solver, seed, _fmt(o[0]), _fmt(o[1]), _fmt(o[2]), o[3]])
    _write(buf.getvalue(), args.out)
    return EXIT_INFEASIBLE if any(o[4] for o in outcomes) else EXIT_OK


def cmd_trace(args) -> int:
    cfg = load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    scenario = generate(seed, cfg.M, cfg.params)
    try:
        result = solve_bss(scenario, cfg.epsilon, cfg.feasibility)
    except InfeasibleScenarioError as exc:
        _write(f"# schema_version={SCHEMA_VERSION}\n# infeasible: {exc}\n", args.out)
        return EXIT_INFEASIBLE
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["iteration", "lo", "hi", "mid", "feasible"])
    for row in result.trace:
        writer.writerow([row.iteration, _fmt(row.lo), _fmt(row.hi), _fmt(row.mid), _fmt(row.feasible)])
    writer.writerow(["final", _fmt(result.extra["lo"]), _fmt(result.extra["hi"]), _fmt(result.alpha_star), ""])
    if scenario.num_users == 2:
        ref = solve_closed_form(scenario, cfg.epsilon, cfg.feasibility)
        writer.writerow(["closed2", "", "", _fmt(ref.alpha_star), ""])
    _write(buf.getvalue(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noma-mec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one seeded scenario")
    p.add_argument("config")
    p.add_argument("--solver", choices=SOLVERS, default="bss")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="vary one parameter across solvers and seeds, write CSV")
    p.add_argument("config")
    p.add_argument("--vary", choices=["p_max", "e_max", "M", "L"], required=True)
    p.add_argument("--values", default="", help="comma-separated values")
    p.add_argument("--solvers", default="bss")
    p.add_argument("--seed", type=int, help="first seed (default: config seed)")
    p.add_argument("--trials", type=int, default=1, help="number of consecutive seeds")
    p.add_argument("--average", action="store_true", help="one row per value and solver, averaged over seeds")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("trace", help="bisection trace as CSV")
    p.add_argument("config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_trace)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, UsageError, ValueError) as exc:
        print(f"noma-mec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
