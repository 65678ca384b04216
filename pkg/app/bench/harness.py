"""Benchmark runs: every strategy on every spec, timed one solve at a time."""

import logging
import math
import time
from collections import defaultdict
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel

from app.config.settings import Settings
from app.core.schemas import (
    BarrierParams, BenchRecord, GeneratedLayout, LayoutSpec, SolveStatus, Strategy,
)
from app.layout.model import build_solution, count_suboptimal
from app.solvers.base import LayoutSolver
from app.solvers.registry import create_solver

logger = logging.getLogger(__name__)

BenchItem = Union[LayoutSpec, GeneratedLayout]
RecordCallback = Callable[[BenchRecord], None]


class ConvergenceSummary(BaseModel):
    """Per-strategy outcome counts of a benchmark run."""
    instances: int = 0
    optimal: int = 0
    suboptimal_instances: int = 0
    suboptimal_constraints: int = 0


def _unpack(item: BenchItem, position: int) -> Tuple[LayoutSpec, int]:
    if isinstance(item, GeneratedLayout):
        return item.spec, item.entry.index
    return item, position


def _time_solve(solver: LayoutSolver, problem, repeats: int):
    """Median wall time in ms over `repeats` solves, and the last result."""
    timings = []
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = solver.solve_problem(problem)
        timings.append((time.perf_counter() - start) * 1000.0)
    return float(np.median(timings)), result


def _warm_up(solvers: Sequence[LayoutSolver], spec: LayoutSpec, runs: int):
    for solver in solvers:
        problem = solver.lower(spec)
        for _ in range(runs):
            solver.solve_problem(problem)


def bench_one(solver: LayoutSolver, spec: LayoutSpec, run: int, tol: float, repeats: int) -> BenchRecord:
    """Lower (untimed), solve `repeats` times and measure the median solve."""
    strategy = solver.strategy
    constraints = len(spec.constraints)
    try:
        problem = solver.lower(spec)
        time_ms, result = _time_solve(solver, problem, repeats)
        solution = build_solution(spec, result, strategy)
        return BenchRecord(
            strategy=strategy,
            constraints=constraints,
            run=run,
            time_ms=time_ms,
            suboptimal=count_suboptimal(spec, solution.x, tol),
            iterations=solution.iterations,
            status=solution.status,
        )
    except Exception as e:
        logger.error(f"{strategy.label} failed on {constraints} constraints (run {run}): {e}", exc_info=True)
        return BenchRecord(strategy=strategy, constraints=constraints, run=run,
                           time_ms=0.0, status=SolveStatus.ERROR)


def run_bench(
    specs: Iterable[BenchItem],
    strategies: Sequence[Union[str, Strategy]],
    tol: float = 1e-3,
    repeats: int = 3,
    warmup: int = 2,
    settings: Optional[Settings] = None,
    params: Optional[BarrierParams] = None,
    on_record: Optional[RecordCallback] = None,
) -> List[BenchRecord]:
    """
    Solve every spec with every strategy and record the median solve time.

    Args:
        specs: layout specs, or generated layouts (their suite index becomes the run)
        strategies: strategies or their CLI names
        tol: sub-optimality tolerance passed to count_suboptimal
        repeats: timed solves per cell; the median is recorded
        warmup: untimed solves per strategy before measuring
        settings: solver defaults
        params: barrier parameters overriding the settings
        on_record: called with each record as soon as it is measured

    Returns:
        One record per (spec, strategy), in spec order
    """
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if repeats < 1:
        raise ValueError(f"repeats must be at least 1, got {repeats}")
    items = list(specs)
    if not items:
        raise ValueError("no specs to benchmark")

    solvers = [create_solver(s, settings, params=params) for s in strategies]
    if warmup > 0:
        try:
            _warm_up(solvers, _unpack(items[0], 0)[0], warmup)
        except Exception as e:
            logger.warning(f"Warm-up failed: {e}")

    records: List[BenchRecord] = []
    for position, item in enumerate(items):
        spec, run = _unpack(item, position)
        for solver in solvers:
            record = bench_one(solver, spec, run, tol, repeats)
            records.append(record)
            if on_record is not None:
                on_record(record)
        if (position + 1) % 50 == 0:
            logger.info(f"Benchmarked {position + 1}/{len(items)} specs")

    logger.info(f"Benchmark finished: {len(records)} records")
    return records


def summarize_convergence(records: Iterable[BenchRecord]) -> Dict[Strategy, ConvergenceSummary]:
    """Instances, optimal results and sub-optimal counts per strategy."""
    summary: Dict[Strategy, ConvergenceSummary] = {}
    for record in records:
        entry = summary.setdefault(record.strategy, ConvergenceSummary())
        entry.instances += 1
        if record.status is SolveStatus.OPTIMAL:
            entry.optimal += 1
        if record.suboptimal > 0:
            entry.suboptimal_instances += 1
            entry.suboptimal_constraints += record.suboptimal
    return summary


def format_convergence(summary: Dict[Strategy, ConvergenceSummary]) -> str:
    lines = [f"{'strategy':<14}{'instances':>10}{'optimal':>10}{'sub-opt inst':>14}{'sub-opt cons':>14}"]
    for strategy, entry in summary.items():
        lines.append(
            f"{strategy.label:<14}{entry.instances:>10}{entry.optimal:>10}"
            f"{entry.suboptimal_instances:>14}{entry.suboptimal_constraints:>14}"
        )
    return "\n".join(lines)


def median_times_by_size(records: Iterable[BenchRecord]) -> Dict[Strategy, Dict[int, float]]:
    """Median time_ms per strategy and constraint count; failed solves are left out."""
    grouped: Dict[Strategy, Dict[int, List[float]]] = defaultdict(lambda: defaultdict(list))
    for record in records:
        if record.status is SolveStatus.ERROR:
            continue
        grouped[record.strategy][record.constraints].append(record.time_ms)
    return {
        strategy: {size: float(np.median(times)) for size, times in sorted(by_size.items())}
        for strategy, by_size in grouped.items()
    }


def ordering_holds(
    records: Iterable[BenchRecord],
    faster: Strategy,
    slower: Strategy,
    top_fraction: float = 0.25,
    required: float = 0.9,
) -> bool:
    """
    Whether `faster` beats `slower` on the largest sizes.

    Looks at the top `top_fraction` of the sizes both strategies measured and
    requires the median time ordering on at least `required` of them.
    """
    medians = median_times_by_size(records)
    fast, slow = medians.get(faster, {}), medians.get(slower, {})
    sizes = sorted(set(fast) & set(slow))
    if not sizes:
        return False
    top = sizes[-max(1, math.ceil(len(sizes) * top_fraction)):]
    wins = sum(1 for size in top if fast[size] < slow[size])
    return wins >= required * len(top)


def timing_points(records: Iterable[BenchRecord], strategy: Strategy) -> List[Tuple[float, float]]:
    """(constraints, time_ms) pairs of one strategy, for the regression fits."""
    return [
        (float(r.constraints), r.time_ms)
        for r in records
        if r.strategy is strategy and r.status is not SolveStatus.ERROR
    ]
