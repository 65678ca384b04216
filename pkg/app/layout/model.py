"""Error measurement on layout constraints and assembly of layout-level solutions."""

import logging
from typing import List, Optional, Sequence

import numpy as np

from app.core.schemas import (
    Constraint, LayoutSpec, OptimizationResult, Relation, Solution, SolveStatus, Strategy,
)

logger = logging.getLogger(__name__)

HARD_FEASIBILITY_TOL = 1e-6


def residual(constraint: Constraint, x: Sequence[float]) -> float:
    """
    Error of a constraint at `x`: the amount by which it is violated.

    EQ -> |lhs - rhs|, LE -> max(0, lhs - rhs), GE -> max(0, rhs - lhs).
    """
    diff = constraint.lhs(x) - constraint.rhs
    if constraint.relation is Relation.EQ:
        return abs(diff)
    if constraint.relation is Relation.LE:
        return max(0.0, diff)
    return max(0.0, -diff)


def constraint_errors(spec: LayoutSpec, x: Sequence[float]) -> List[float]:
    """Residual of every constraint of `spec`, in order."""
    return [residual(c, x) for c in spec.constraints]


def count_suboptimal(spec: LayoutSpec, x: Sequence[float], tol: float) -> int:
    """Number of constraints whose error is not smaller than `tol` (hard and soft alike)."""
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    return sum(1 for err in constraint_errors(spec, x) if err >= tol)


def max_hard_error(spec: LayoutSpec, x: Sequence[float]) -> float:
    errors = [residual(c, x) for c in spec.constraints if c.is_hard]
    return max(errors, default=0.0)


def soft_objective(spec: LayoutSpec, x: Sequence[float], power: int = 2) -> float:
    """Penalty-weighted soft violation: sum(p * r^power) over soft constraints."""
    return float(sum(c.penalty * residual(c, x) ** power for c in spec.constraints if c.is_soft))


def build_solution(
    spec: LayoutSpec,
    result: OptimizationResult,
    strategy: Optional[Strategy] = None,
) -> Solution:
    """
    Cut a problem-level result back to the layout variables and measure errors.

    A result reported optimal whose hard errors exceed the hard-feasibility
    tolerance is downgraded to a numerical error.
    """
    x = np.asarray(result.x, dtype=float)[:spec.var_count]
    if x.shape[0] < spec.var_count:
        x = np.zeros(spec.var_count)
    values = [float(v) for v in x]
    errors = constraint_errors(spec, values)

    status = result.status
    message = result.message
    if status is SolveStatus.OPTIMAL:
        worst = max((e for e, c in zip(errors, spec.constraints) if c.is_hard), default=0.0)
        if worst > HARD_FEASIBILITY_TOL:
            logger.warning(f"Optimal result violates a hard constraint by {worst:.3e}")
            status = SolveStatus.NUMERICAL_ERROR
            message = f"hard constraint violated by {worst:.3e}"

    return Solution(
        x=values,
        status=status,
        iterations=result.iterations,
        errors=errors,
        objective=None if np.isnan(result.objective) else float(result.objective),
        strategy=strategy,
        message=message,
    )
