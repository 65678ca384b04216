"""Primal active set method for convex QPs.

Each iteration solves the QP restricted to the working set as an equality
problem, then either steps toward its minimizer (adding the first blocking
row) or drops the working row with the most negative multiplier.
"""

import logging
from typing import Callable, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from app.core.errors import (
    InfeasibleError, IterationLimitError, NonFiniteError, SingularMatrixError,
)
from app.core.schemas import LayoutSpec, OptimizationResult, SolveStatus, Strategy
from app.linalg.dense import as_vector, independent_rows, solve_kkt
from app.solvers.base import LayoutSolver
from app.solvers.simplex import find_feasible_point
from app.transform.lowering import QpProblem, to_qp

logger = logging.getLogger(__name__)

STEP_TOL = 1e-9
MULTIPLIER_TOL = -1e-9
RATE_TOL = 1e-12
TIGHT_TOL = 1e-8

IterateCallback = Callable[[int, np.ndarray, "ActiveSet"], None]


class ActiveSet:
    """Ordered inequality rows treated as equalities; equality rows are always active."""

    def __init__(self, indices: Iterable[int] = ()):
        self._indices: List[int] = list(indices)

    def add(self, row: int):
        if row in self._indices:
            raise ValueError(f"row {row} is already active")
        self._indices.append(row)

    def remove(self, row: int):
        self._indices.remove(row)

    @property
    def indices(self) -> List[int]:
        return list(self._indices)

    def __contains__(self, row: int) -> bool:
        return row in self._indices

    def __len__(self) -> int:
        return len(self._indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self._indices)


def eq_subproblem(Q, grad, W) -> Tuple[np.ndarray, np.ndarray]:
    """
    Step and multipliers of the working-set equality problem.

    Solves Q delta + W^T lambda = -grad, W delta = 0.

    Raises:
        SingularMatrixError: the working set is degenerate
    """
    return solve_kkt(Q, W, -np.asarray(grad, dtype=float))


def step_length_alpha(C, d, x, delta, active: ActiveSet) -> Tuple[float, Optional[int]]:
    """
    Largest alpha in [0, 1] keeping x + alpha * delta feasible for the inactive rows.

    Returns (alpha, blocking row); the blocking row is None on a full step
    and ties go to the lowest row index.
    """
    C = np.asarray(C, dtype=float)
    if C.shape[0] == 0:
        return 1.0, None
    rate = C @ delta
    candidates = rate > RATE_TOL
    if len(active):
        candidates[active.indices] = False
    if not np.any(candidates):
        return 1.0, None

    rows = np.flatnonzero(candidates)
    ratios = np.maximum(0.0, (np.asarray(d)[rows] - C[rows] @ x) / rate[rows])
    best = int(np.argmin(ratios))
    if ratios[best] >= 1.0:
        return 1.0, None
    return float(ratios[best]), int(rows[best])


def _initial_working_set(qp: QpProblem, x: np.ndarray) -> ActiveSet:
    if qp.m_ineq == 0:
        return ActiveSet()
    gap = np.abs(qp.C_ineq @ x - qp.d_ineq)
    tight = np.flatnonzero(gap <= TIGHT_TOL * (1.0 + np.abs(qp.d_ineq)))
    base = qp.A_eq if qp.m_eq else None
    return ActiveSet(independent_rows(qp.C_ineq, tight, base=base))


def _default_budget(qp: QpProblem) -> int:
    return 10 * (qp.n + qp.m_ineq) + 100


def solve_qp_as(
    qp: QpProblem,
    max_iter: Optional[int] = None,
    x0=None,
    on_iterate: Optional[IterateCallback] = None,
) -> OptimizationResult:
    """
    Solve a convex QP with the primal active set method.

    Args:
        qp: problem to solve
        max_iter: iteration budget (0 or None scales with problem size)
        x0: feasible starting point; found by simplex phase I when omitted
        on_iterate: called as on_iterate(iteration, x, working set) after every iteration

    Returns:
        OptimizationResult; iterations counts working-set iterations
    """
    budget = max_iter or _default_budget(qp)
    x = np.zeros(qp.n)
    iterations = 0
    try:
        if x0 is None:
            x = find_feasible_point(qp.A_eq, qp.b_eq, qp.C_ineq, qp.d_ineq)
        else:
            x = as_vector(x0, length=qp.n, name="x0")
        qp = qp.with_independent_equalities()
        if qp.is_feasibility_only:
            return OptimizationResult(x=x, status=SolveStatus.OPTIMAL, objective=qp.objective(x))

        active = _initial_working_set(qp, x)
        logger.debug(f"Active set: base point with {len(active)} tight rows")

        while iterations < budget:
            iterations += 1
            rows = active.indices
            W = np.vstack([qp.A_eq, qp.C_ineq[rows]]) if rows else qp.A_eq
            delta, lam = eq_subproblem(qp.Q, qp.gradient(x), W)

            if np.max(np.abs(delta), initial=0.0) <= STEP_TOL:
                multipliers = lam[qp.m_eq:]
                if multipliers.size == 0 or multipliers.min() >= MULTIPLIER_TOL:
                    logger.debug(f"Active set: optimal after {iterations} iterations")
                    return OptimizationResult(
                        x=x,
                        status=SolveStatus.OPTIMAL,
                        iterations=iterations,
                        objective=qp.objective(x),
                        stats={"active": rows, "multipliers": multipliers.tolist()},
                    )
                leaving = rows[int(np.argmin(multipliers))]
                active.remove(leaving)
                logger.debug(f"Active set: drop row {leaving} (lambda={multipliers.min():.3e})")
                if on_iterate is not None:
                    on_iterate(iterations, x, active)
                continue

            alpha, blocking = step_length_alpha(qp.C_ineq, qp.d_ineq, x, delta, active)
            x = x + alpha * delta
            if blocking is not None:
                active.add(blocking)
                logger.debug(f"Active set: add row {blocking} (alpha={alpha:.3e})")
            if on_iterate is not None:
                on_iterate(iterations, x, active)

        raise IterationLimitError(f"active set did not converge in {budget} iterations",
                                  iterations=iterations)
    except InfeasibleError as e:
        logger.info(f"QP infeasible: {e}")
        return OptimizationResult(x=x, status=SolveStatus.INFEASIBLE, message=str(e))
    except IterationLimitError as e:
        logger.warning(f"Active set stopped: {e}")
        return OptimizationResult(x=x, status=SolveStatus.ITERATION_LIMIT,
                                  iterations=iterations, message=str(e))
    except (SingularMatrixError, NonFiniteError) as e:
        logger.warning(f"Active set hit a numerical failure: {e}")
        return OptimizationResult(x=x, status=SolveStatus.NUMERICAL_ERROR,
                                  iterations=iterations, message=str(e))


class ActiveSetSolver(LayoutSolver):
    """Active set method on the squared-slack QP."""

    strategy = Strategy.ACTIVE_SET

    def __init__(self, max_iter: int = 0, **options):
        super().__init__(**options)
        self.max_iter = max_iter

    def lower(self, spec: LayoutSpec) -> QpProblem:
        return to_qp(spec)

    def solve_problem(self, problem: QpProblem) -> OptimizationResult:
        return solve_qp_as(problem, self.max_iter)
