"""Main entry point for the layout solver command line."""

import argparse
import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import List, Optional, Sequence

from app.bench.harness import (
    format_convergence, run_bench, summarize_convergence, timing_points,
)
from app.bench.regression import compare_models, fit_cubic, format_regression_table
from app.config.settings import Settings, load_settings
from app.core.errors import DegenerateFitError, LayoutSolverError, ParseError
from app.core.schemas import GenConfig, LayoutSpec, Solution, SolveStatus, Strategy
from app.layout.generator import generate_suite, write_suite
from app.layout.model import count_suboptimal
from app.layout.spec_io import format_number, read_spec
from app.solvers.registry import create_solver, parse_strategies, parse_strategy
from app.storage.results_exporter import ResultsExporter
from app.utils.paths import resolve_path

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def setup_logging(settings: Optional[Settings] = None):
    """Configure logging for the application."""
    settings = settings or Settings()
    log_path = resolve_path(settings.log_file)
    log_path.parent.mkdir(parents=True, exist_ok=True)

    file_handler = RotatingFileHandler(
        str(log_path),
        maxBytes=settings.log_rotation_max_bytes,
        backupCount=settings.log_rotation_backup_count,
    )

    # Results go to stdout; log records go to stderr and the file.
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            file_handler,
            logging.StreamHandler(sys.stderr),
        ],
        force=True,
    )


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so dispatch owns the exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _add_generator_flags(parser: argparse.ArgumentParser, settings: Settings):
    parser.add_argument("--min", dest="min_size", type=int, default=4, help="Smallest constraint count")
    parser.add_argument("--max", dest="max_size", type=int, default=2400, help="Largest constraint count")
    parser.add_argument("--step", type=int, default=4, help="Constraint count increment (multiple of 4)")
    parser.add_argument("--per-size", type=int, default=10, help="Layouts per constraint count")
    parser.add_argument("--seed", type=int, default=settings.generator_seed, help="Suite seed")
    parser.add_argument("--width", type=int, default=settings.window_width, help="Window width")
    parser.add_argument("--height", type=int, default=settings.window_height, help="Window height")


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    parser = _Parser(prog="layout-solvers", description="Solve and benchmark UI layout constraint specs")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    strategy_names = [s.value for s in Strategy]

    gen = sub.add_parser("generate", help="Write a random layout suite as spec files")
    _add_generator_flags(gen, settings)
    gen.add_argument("--out", required=True, help="Output directory")

    solve = sub.add_parser("solve", help="Solve one spec file")
    solve.add_argument("file", help="Spec file")
    solve.add_argument("--strategy", choices=strategy_names, default=Strategy.INTERIOR_POINT.value)
    solve.add_argument("--tol", type=float, default=settings.bench_tol, help="Sub-optimality tolerance")
    solve.add_argument("--mu", type=float, help="Barrier multiplier (ip)")
    solve.add_argument("--eps", type=float, help="Barrier stopping parameter (ip)")
    solve.add_argument("--max-iter", type=int, help="Iteration cap (as, simplex)")
    solve.add_argument("--json", dest="json_out", help="Also write the solution as JSON")

    bench = sub.add_parser("bench", help="Time strategies over a spec directory or a generated suite")
    bench.add_argument("--strategies", default=",".join(strategy_names), help="Comma separated strategies")
    bench.add_argument("--tol", type=float, default=settings.bench_tol)
    bench.add_argument("--repeats", type=int, default=settings.bench_repeats)
    bench.add_argument("--warmup", type=int, default=settings.bench_warmup_runs)
    bench.add_argument("--out", required=True, help="CSV output file")
    bench.add_argument("--specs", help="Directory of .spec files (instead of generating)")
    _add_generator_flags(bench, settings)

    fit = sub.add_parser("fit", help="Fit the cubic timing model to a benchmark CSV")
    fit.add_argument("csv", help="Benchmark CSV")
    fit.add_argument("--strategy", choices=strategy_names, help="Only this strategy")
    fit.add_argument("--models", action="store_true", help="Also compare linear, quadratic and log models")

    return parser


def _gen_config(args) -> GenConfig:
    return GenConfig(
        min_size=args.min_size,
        max_size=args.max_size,
        step=args.step,
        per_size=args.per_size,
        seed=args.seed,
        window=(args.width, args.height),
    )


def format_solution(spec: LayoutSpec, solution: Solution, tol: float) -> str:
    """Human readable report of a solve."""
    lines = [
        f"status: {solution.status.value}",
        f"strategy: {solution.strategy.label if solution.strategy else '-'}",
        f"iterations: {solution.iterations}",
        f"objective: {'-' if solution.objective is None else f'{solution.objective:.6g}'}",
        "x:",
    ]
    width = max(len(name) for name in spec.var_names)
    for name, value in zip(spec.var_names, solution.x):
        lines.append(f"  {name:<{width}} = {value:.6f}")
    lines.append("errors:")
    for i, (constraint, error) in enumerate(zip(spec.constraints, solution.errors)):
        kind = "H" if constraint.is_hard else f"S:{format_number(constraint.penalty)}"
        lines.append(f"  [{i}] {kind:<6} {constraint.relation.value}  {error:.6g}")
    lines.append(f"suboptimal (tol={tol:g}): {count_suboptimal(spec, solution.x, tol)}")
    if solution.message:
        lines.append(f"message: {solution.message}")
    return "\n".join(lines)


def _exit_for(status: SolveStatus) -> int:
    return EXIT_OK if status is SolveStatus.OPTIMAL else EXIT_FAILED


def cmd_generate(args, settings: Settings) -> int:
    paths = write_suite(_gen_config(args), args.out)
    print(f"wrote {len(paths)} spec files to {args.out}")
    return EXIT_OK


def cmd_solve(args, settings: Settings) -> int:
    if args.tol <= 0:
        raise _UsageError(f"--tol must be positive, got {args.tol}")
    spec = read_spec(args.file)
    strategy = parse_strategy(args.strategy)
    params = settings.barrier_params(mu=args.mu, eps=args.eps)
    solver = create_solver(strategy, settings, params=params, max_iter=args.max_iter)

    solution = solver.solve(spec)
    print(format_solution(spec, solution, args.tol))
    if args.json_out:
        ResultsExporter(settings.output_dir).export_solution(spec, solution, Path(args.json_out).absolute())
    return _exit_for(solution.status)


def _load_spec_dir(directory: str) -> List[LayoutSpec]:
    path = Path(directory)
    if not path.is_dir():
        raise _UsageError(f"spec directory not found: {directory}")
    files = sorted(path.glob("*.spec"))
    if not files:
        raise _UsageError(f"no .spec files in {directory}")
    return [read_spec(f) for f in files]


def cmd_bench(args, settings: Settings) -> int:
    strategies = parse_strategies(args.strategies)
    if args.tol <= 0 or args.repeats < 1:
        raise _UsageError("--tol must be positive and --repeats at least 1")
    specs = _load_spec_dir(args.specs) if args.specs else generate_suite(_gen_config(args))

    records = run_bench(specs, strategies, tol=args.tol, repeats=args.repeats,
                        warmup=args.warmup, settings=settings)
    path = ResultsExporter(settings.output_dir).export_records(records, Path(args.out).absolute(), format="csv")
    print(format_convergence(summarize_convergence(records)))
    print(f"wrote {len(records)} records to {path}")
    return EXIT_OK


def cmd_fit(args, settings: Settings) -> int:
    if not Path(args.csv).is_file():
        raise _UsageError(f"CSV not found: {args.csv}")
    records = ResultsExporter(settings.output_dir).read_records(args.csv)
    present = [s for s in Strategy if any(r.strategy is s for r in records)]
    strategies = [parse_strategy(args.strategy)] if args.strategy else present

    fits = []
    for strategy in strategies:
        points = timing_points(records, strategy)
        try:
            fits.append(fit_cubic(points, strategy))
        except DegenerateFitError as e:
            print(f"{strategy.label}: {e}", file=sys.stderr)
            return EXIT_FAILED
        if args.models:
            fits.extend(f for f in compare_models(points, strategy) if f.model != "cubic")

    print(format_regression_table(fits))
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "bench": cmd_bench,
    "fit": cmd_fit,
}


def dispatch(argv: Sequence[str], settings: Optional[Settings] = None) -> int:
    """
    Run one CLI command.

    Returns:
        0 on success, 1 when the problem is infeasible, unbounded or not
        solved, 2 on usage errors
    """
    settings = settings or Settings()
    parser = build_parser(settings)
    try:
        args = parser.parse_args(list(argv))
        return COMMANDS[args.command](args, settings)
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else EXIT_OK
    except _UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except LayoutSolverError as e:
        logger.error(f"Command failed: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILED


def main():
    """Main application entry point."""
    settings = load_settings()
    setup_logging(settings)
    sys.exit(dispatch(sys.argv[1:], settings))


if __name__ == "__main__":
    main()
