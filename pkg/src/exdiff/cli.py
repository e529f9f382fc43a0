"""Command-line front end: analyze | simulate | sweep.

Exit codes: 0 success, 2 input error, 3 degenerate signal, 4 internal or
simulation divergence.  ``analyze`` also exits 3 when the verdict comes back
indeterminate so shell pipelines can branch on it.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .core import (
    DIFFUSIVE,
    INDETERMINATE,
    NON_DIFFUSIVE,
    ClassifierConfig,
    EpsilonGrid,
    Trajectory,
    Verdict,
    classify,
)
from .errors import DegenerateSignalError, InvalidInputError, SimulationDivergedError
from .seriesio import (
    read_series_csv,
    simple_returns,
    spec_to_config,
    write_trajectory_csv,
)
from .sweep import export_results, load_plan, run_sweep
from .systems import ALL_KINDS, DETERMINISTIC_KINDS, SystemSpec, simulate

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_INTERNAL = 4

_CLASS_TOKEN = {
    DIFFUSIVE: "DIFFUSIVE",
    NON_DIFFUSIVE: "NON-DIFFUSIVE",
    INDETERMINATE: "INDETERMINATE",
}

MAX_TABLE_ROWS = 24


def _summary_line(verdict: Verdict) -> str:
    slope = verdict.slope_fit.slope if verdict.slope_fit is not None else float("nan")
    return (
        f"verdict: {_CLASS_TOKEN[verdict.classification]} "
        f"(slope {slope:.2f}, reason {verdict.reason})"
    )


def _render_text_report(path, traj: Trajectory, verdict: Verdict) -> str:
    lines = [
        f"series: {path} (n={traj.n}, dt={traj.dt:g})",
    ]
    if verdict.profile is not None:
        prof = verdict.profile
        lines.append(f"quadratic variation: {prof.qv:.6g}")
        if verdict.slope_fit is not None:
            fit = verdict.slope_fit
            eps = prof.grid.epsilons
            lines.append(
                f"fit: slope={fit.slope:.4f} r2={fit.r_squared:.4f} over "
                f"eps [{eps[fit.range_lo]:.3e}, {eps[fit.range_hi]:.3e}] "
                f"({fit.n_points} points)"
            )
        lines.append("")
        lines.append(f"{'eps':>12}  {'n_emp':>10}  {'n_theory':>12}  {'K':>10}")
        n = len(prof.grid)
        show = min(n, MAX_TABLE_ROWS)
        for i in range(show):
            lines.append(
                f"{prof.grid.epsilons[i]:>12.3e}  {int(prof.n_emp[i]):>10d}  "
                f"{prof.n_theory[i]:>12.4g}  {prof.k_ratio[i]:>10.4g}"
            )
        if n > show:
            lines.append(f"... ({n - show} more rows)")
        lines.append("")
    lines.append(_summary_line(verdict))
    return "\n".join(lines)


def _report_dict(path, traj: Trajectory, verdict: Verdict) -> dict:
    fit = verdict.slope_fit
    prof = verdict.profile
    return {
        "path": str(path),
        "n": traj.n,
        "dt": traj.dt,
        "classification": verdict.classification,
        "reason": verdict.reason,
        "slope": None if fit is None else fit.slope,
        "intercept": None if fit is None else fit.intercept,
        "r_squared": None if fit is None else fit.r_squared,
        "fit_range": None if fit is None else [fit.range_lo, fit.range_hi],
        "qv": None if prof is None else prof.qv,
        "epsilons": None if prof is None else prof.grid.epsilons.tolist(),
        "n_emp": None if prof is None else [int(v) for v in prof.n_emp],
        "n_theory": None if prof is None else prof.n_theory.tolist(),
        "k_ratio": None if prof is None else prof.k_ratio.tolist(),
        "summary": _summary_line(verdict),
    }


def cmd_analyze(args) -> int:
    values, inferred_dt = read_series_csv(args.path, column=args.column)
    if args.returns:
        values = simple_returns(values)
    dt = args.dt if args.dt is not None else (inferred_dt if inferred_dt else 1.0)
    traj = Trajectory(values=values, dt=dt)

    grid = None
    if args.eps_min is not None or args.eps_max is not None:
        if args.eps_min is None or args.eps_max is None:
            raise InvalidInputError("--eps-min and --eps-max must be given together")
        grid = EpsilonGrid.geometric(args.eps_min, args.eps_max, args.eps_points)
    config = ClassifierConfig(grid=grid, grid_points=args.eps_points)
    verdict = classify(traj, config)

    if args.json:
        print(json.dumps(_report_dict(args.path, traj, verdict), indent=2, sort_keys=True))
    else:
        print(_render_text_report(args.path, traj, verdict))
    return EXIT_DEGENERATE if verdict.classification == INDETERMINATE else EXIT_OK


def _parse_param(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise InvalidInputError(f"--param expects name=value, got '{item}'")
        key, value = item.split("=", 1)
        num = float(value)
        out[key.strip()] = int(num) if num.is_integer() else num
    return out


def cmd_simulate(args) -> int:
    kwargs = {
        "kind": args.kind,
        "dt": args.dt,
        "T": args.T,
        "seed": args.seed,
        "params": _parse_param(args.param),
    }
    if args.snr is not None:
        kwargs["snr_db"] = args.snr
    if args.R is not None:
        kwargs["R"] = args.R
    if args.x0 is not None:
        kwargs["initial_state"] = tuple(float(v) for v in args.x0.split(","))
    spec = SystemSpec(**kwargs)
    series = simulate(spec)
    write_trajectory_csv(args.out, series.trajectory)
    print(f"wrote {series.trajectory.n} samples to {args.out}")
    print(f"ground_truth = {series.ground_truth}")
    print(spec_to_config(spec), end="")
    return EXIT_OK


def cmd_sweep(args) -> int:
    plan = load_plan(args.plan)

    def progress(cell):
        print(
            f"cell dt={cell.dt:g} T={cell.T:g} noise={cell.noise:g}: "
            f"accuracy={cell.accuracy:.3f} ({cell.n_reps} reps)",
            file=sys.stderr,
        )

    result = run_sweep(plan, max_workers=args.workers, progress=progress)
    export_results(result, args.out, fmt=args.format)
    print(f"wrote {len(result.cells)} cells to {args.out}", file=sys.stderr)
    expected = len(plan.cells()) * plan.reps
    if result.total_verdicts() != expected:
        print(
            f"error: produced {result.total_verdicts()} of {expected} verdicts",
            file=sys.stderr,
        )
        return EXIT_INTERNAL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exdiff",
        description="Classify a time series as diffusion-like or non-diffusive "
        "from its excursion-count scaling.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=0, help="default seed for simulate")
    parser.add_argument("--json", action="store_true", help="JSON output where supported")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="classify a CSV time series")
    p.add_argument("path")
    p.add_argument("--column", default=None,
                   help="value column, by index or header name (default: auto)")
    p.add_argument("--dt", type=float, default=None,
                   help="sampling interval (default: inferred from a time column, else 1)")
    p.add_argument("--returns", action="store_true",
                   help="transform prices to simple returns first")
    p.add_argument("--eps-min", type=float, default=None)
    p.add_argument("--eps-max", type=float, default=None)
    p.add_argument("--eps-points", type=int, default=24)
    # SUPPRESS keeps the top-level --json value unless the flag repeats here
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="generate a benchmark trajectory CSV")
    p.add_argument("--kind", required=True, choices=ALL_KINDS)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--T", type=float, default=100.0)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--snr", type=float, default=None,
                   help=f"SNR in dB (deterministic kinds: {', '.join(DETERMINISTIC_KINDS)})")
    p.add_argument("--R", type=float, default=None,
                   help="noise intensity control for stochastic kinds (sigma = 1/R)")
    p.add_argument("--param", action="append", metavar="NAME=VALUE",
                   help="override a system parameter; repeatable")
    p.add_argument("--x0", default=None, help="comma-separated initial state")
    p.add_argument("--out", default="trajectory.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a Monte Carlo accuracy sweep from a plan file")
    p.add_argument("plan")
    p.add_argument("--out", default="sweep.csv")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DegenerateSignalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except SimulationDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
