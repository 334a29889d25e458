"""Command-line interface: ``tabuport uef|solve|metrics``."""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from .exceptions import Infeasible, TabuportError
from .frontier import frontier_from_runs, run_lambda_sweep, solve_uef, summary_metrics
from .instance import load_orlib
from .portfolio import check_bounds
from .reporting import (
    format_report,
    read_frontier_csv,
    write_frontier_csv,
    write_frontier_svg,
    write_report_csv,
    write_rows_csv,
)
from .tabu import TabuParams

TRACE_HEADER = ["lambda", "t1_call", "q", "iteration", "objective", "incumbent", "move", "asset"]
SUMMARY_HEADER = [
    "lambda", "seed", "initial_objective", "objective", "passes", "t1_calls",
    "iterations", "pass_objectives",
]
_MOVE_NAMES = ("increase", "decrease", "swap")


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_suffix(suffix)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def cmd_uef(args) -> int:
    inst = load_orlib(args.instance)
    t0 = time.perf_counter()
    uef = solve_uef(inst, args.uef_points, args.tol)
    elapsed = time.perf_counter() - t0

    write_frontier_csv(uef, args.out)
    if not args.no_plot:
        svg = args.svg or _sibling(args.out, ".svg")
        write_frontier_svg(svg, [("UEF", uef, "#1f77b4")], title=f"UEF {inst.name}", connect=[True])
    print(f"{inst.name}: {len(uef)} frontier points in {elapsed:.2f} s -> {args.out}")
    return 0


def cmd_solve(args) -> int:
    # bad bounds are reported before the instance is even read
    check_bounds(args.k, args.epsilon, args.delta)
    inst = load_orlib(args.instance)
    if args.k > inst.n:
        raise Infeasible(f"{args.instance}: k = {args.k} exceeds the {inst.n} assets in the file")

    tabu = TabuParams(stagnation_limit=args.stagnation_limit)
    t0 = time.perf_counter()
    runs = run_lambda_sweep(
        inst, args.k, args.epsilon, args.delta, args.lambda_step, args.seed,
        args.t_trials, tabu, n_jobs=args.parallel, trace=args.trace is not None,
    )
    elapsed = time.perf_counter() - t0
    cef = frontier_from_runs(inst, runs)

    write_frontier_csv(cef, args.out)
    summary = args.summary or args.out.with_name(args.out.stem + "_summary.csv")
    write_rows_csv(
        summary,
        SUMMARY_HEADER,
        (
            [r.risk_aversion, r.seed, r.result.initial_objective, r.result.objective,
             r.result.passes, r.result.t1_calls, r.result.iterations,
             ";".join(repr(float(v)) for v in r.result.pass_objectives)]
            for r in runs
        ),
    )
    if args.trace is not None:
        write_rows_csv(
            args.trace,
            TRACE_HEADER,
            (
                [r.risk_aversion, call, q, it, obj, inc, _MOVE_NAMES[kind], asset]
                for r in runs
                for call, q, it, obj, inc, kind, asset in r.trace
            ),
        )
    if not args.no_plot:
        svg = args.svg or _sibling(args.out, ".svg")
        series = [("CEF", cef, "#d62728")]
        connect = [False]
        if args.uef is not None:
            series.insert(0, ("UEF", read_frontier_csv(args.uef), "#1f77b4"))
            connect.insert(0, True)
        write_frontier_svg(svg, series, title=f"CEF {inst.name}", connect=connect)
    print(f"{inst.name}: {len(cef)} solutions in {elapsed:.2f} s -> {args.out}")
    print(f"time_seconds {elapsed!r}")
    return 0


def cmd_metrics(args) -> int:
    cef = read_frontier_csv(args.cef)
    uef = read_frontier_csv(args.uef)
    report = summary_metrics(cef, uef)
    write_report_csv(report, args.out, args.time_seconds)
    print(format_report(report, args.label or Path(args.cef).stem, args.time_seconds))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tabuport",
        description="Cardinality-constrained mean-variance portfolios by token-ring tabu search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("uef", help="unconstrained efficient frontier by exact QP")
    p.add_argument("instance", type=Path, help="OR-Library portN file")
    p.add_argument("--out", type=Path, default=Path("uef.csv"))
    p.add_argument("--svg", type=Path, default=None, help="plot path (default: --out with .svg)")
    p.add_argument("--no-plot", action="store_true")
    p.add_argument("--uef-points", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_uef)

    p = sub.add_parser("solve", help="constrained frontier by a risk-aversion sweep")
    p.add_argument("instance", type=Path, help="OR-Library portN file")
    p.add_argument("--out", type=Path, default=Path("cef.csv"))
    p.add_argument("--svg", type=Path, default=None, help="plot path (default: --out with .svg)")
    p.add_argument("--no-plot", action="store_true")
    p.add_argument("--uef", type=Path, default=None, help="UEF CSV to draw under the solutions")
    p.add_argument("--summary", type=Path, default=None,
                   help="per-lambda run summary (default: <out>_summary.csv)")
    p.add_argument("--trace", type=Path, default=None, help="write every tabu iteration here")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--lambda-step", type=float, default=0.02)
    p.add_argument("--t-trials", type=_positive_int, default=10000)
    p.add_argument("--stagnation-limit", type=_positive_int, default=200)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--parallel", type=_positive_int, default=os.cpu_count() or 1,
                   help="concurrent lambda runs (default: all cores)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("metrics", help="deviation of a constrained frontier from the UEF")
    p.add_argument("cef", type=Path)
    p.add_argument("uef", type=Path)
    p.add_argument("--out", type=Path, default=Path("report.csv"))
    p.add_argument("--time-seconds", type=float, default=None,
                   help="wall-clock of the solve run, copied into the report")
    p.add_argument("--label", default=None)
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TabuportError, ValueError, OSError) as exc:
        # OSError messages already carry the offending path
        print(f"tabuport {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
