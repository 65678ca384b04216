"""Script to run the convergence and performance experiments end to end."""

import argparse
import logging
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from app.bench.harness import (  # noqa: E402
    format_convergence, median_times_by_size, ordering_holds, run_bench,
    summarize_convergence, timing_points,
)
from app.bench.regression import compare_models, fit_cubic, format_regression_table  # noqa: E402
from app.core.schemas import GenConfig, Strategy  # noqa: E402
from app.layout.generator import generate_suite  # noqa: E402
from app.storage.results_exporter import ResultsExporter  # noqa: E402

logging.basicConfig(level=logging.INFO, format='%(levelname)s: %(message)s')
logger = logging.getLogger(__name__)

STRATEGIES = list(Strategy)


def run_convergence(out_dir: Path, max_size: int, per_size: int, seed: int, tol: float) -> bool:
    """Every strategy on sizes 4..max_size; True when all results are optimal."""
    cfg = GenConfig(min_size=4, max_size=max_size, step=4, per_size=per_size, seed=seed)
    suite = generate_suite(cfg)
    logger.info(f"Convergence experiment: {len(suite)} layouts")

    records = run_bench(suite, STRATEGIES, tol=tol, repeats=1, warmup=0)
    ResultsExporter(str(out_dir)).export_records(records, out_dir / "convergence.csv")
    summary = summarize_convergence(records)
    print(format_convergence(summary))
    return all(entry.optimal == entry.instances for entry in summary.values())


def run_performance(out_dir: Path, max_size: int, step: int, seed: int, repeats: int) -> bool:
    """Timed run over growing sizes, cubic fits and the ordering check."""
    cfg = GenConfig(min_size=4, max_size=max_size, step=step, per_size=1, seed=seed)
    suite = generate_suite(cfg)
    logger.info(f"Performance experiment: {len(suite)} layouts, {repeats} repeats")

    records = run_bench(suite, STRATEGIES, repeats=repeats)
    ResultsExporter(str(out_dir)).export_records(records, out_dir / "performance.csv")

    fits = []
    for strategy in STRATEGIES:
        points = timing_points(records, strategy)
        fits.append(fit_cubic(points, strategy))
        fits.extend(f for f in compare_models(points, strategy) if f.model != "cubic")
    table = format_regression_table(fits)
    (out_dir / "regression.txt").write_text(table + "\n", encoding="utf-8")
    print(table)

    medians = median_times_by_size(records)
    largest = max(medians[Strategy.INTERIOR_POINT])
    for strategy in STRATEGIES:
        logger.info(f"{strategy.label}: median at {largest} constraints = {medians[strategy][largest]:.2f} ms")

    ip_vs_as = ordering_holds(records, Strategy.INTERIOR_POINT, Strategy.ACTIVE_SET)
    ip_vs_simplex = ordering_holds(records, Strategy.INTERIOR_POINT, Strategy.SIMPLEX)
    logger.info(f"InteriorPoint faster than ActiveSet on large sizes: {ip_vs_as}")
    logger.info(f"InteriorPoint faster than Simplex on large sizes: {ip_vs_simplex}")
    return ip_vs_as and ip_vs_simplex


def main():
    parser = argparse.ArgumentParser(
        description="Run the layout solver convergence and performance experiments"
    )
    parser.add_argument("--out", default="output/experiments", help="Output directory")
    parser.add_argument("--seed", type=int, default=42, help="Suite seed")
    parser.add_argument("--tol", type=float, default=1e-3, help="Sub-optimality tolerance")
    parser.add_argument("--convergence-max", type=int, default=400, help="Largest size (convergence)")
    parser.add_argument("--convergence-per-size", type=int, default=5, help="Layouts per size (convergence)")
    parser.add_argument("--performance-max", type=int, default=1200, help="Largest size (performance)")
    parser.add_argument("--performance-step", type=int, default=40, help="Size step (performance)")
    parser.add_argument("--repeats", type=int, default=3, help="Timed solves per cell")
    parser.add_argument(
        "--only",
        choices=["convergence", "performance"],
        help="Run a single experiment"
    )

    args = parser.parse_args()
    out_dir = Path(args.out).absolute()
    out_dir.mkdir(parents=True, exist_ok=True)

    ok = True
    if args.only in (None, "convergence"):
        ok &= run_convergence(out_dir, args.convergence_max, args.convergence_per_size, args.seed, args.tol)
    if args.only in (None, "performance"):
        ok &= run_performance(out_dir, args.performance_max, args.performance_step, args.seed, args.repeats)

    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
