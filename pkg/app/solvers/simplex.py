"""Two-phase primal simplex on a dense tableau.

Every iteration performs one Gauss-Jordan pivot on the full tableau. Pricing
is Dantzig's most negative reduced cost; after 2 * (rows + cols) degenerate
pivots the phase switches to Bland's rule, which cannot cycle.
"""

import logging
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from app.core.errors import InfeasibleError, IterationLimitError, UnboundedError
from app.core.schemas import LayoutSpec, OptimizationResult, SolveStatus, Strategy
from app.solvers.base import LayoutSolver
from app.transform.lowering import LpProblem, to_lp

logger = logging.getLogger(__name__)

COST_TOL = 1e-9
PIVOT_EPS = 1e-9
RHS_TOL = 1e-9
PHASE1_TOL = 1e-9

PivotCallback = Callable[[int, "Tableau"], None]


class StandardForm(BaseModel):
    """min c^T z  s.t.  A z = b,  z >= 0,  b >= 0, plus the map back to LP columns."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    column_map: List[Tuple[int, Optional[int]]]
    slack_columns: List[Optional[int]]

    @property
    def rows(self) -> int:
        return self.A.shape[0]

    @property
    def cols(self) -> int:
        return self.A.shape[1]

    def recover(self, z: np.ndarray) -> np.ndarray:
        """Map a standard-form point back to the LP's own columns."""
        x = np.zeros(len(self.column_map))
        for j, (plus, minus) in enumerate(self.column_map):
            x[j] = z[plus] if minus is None else z[plus] - z[minus]
        return x


def to_standard_form(lp: LpProblem) -> StandardForm:
    """
    Rewrite an LP as min c^T z, A z = b, z >= 0 with b >= 0.

    Free columns are split into z+ - z-; each inequality row gets a slack
    column; rows with a negative right hand side are negated.
    """
    column_map: List[Tuple[int, Optional[int]]] = []
    width = 0
    for j in range(lp.n):
        if lp.nonneg[j]:
            column_map.append((width, None))
            width += 1
        else:
            column_map.append((width, width + 1))
            width += 2
    m_eq, m_ineq = lp.m_eq, lp.m_ineq
    total = width + m_ineq

    rows = m_eq + m_ineq
    A = np.zeros((rows, total))
    c = np.zeros(total)
    source = np.vstack([lp.A_eq, lp.C_ineq]) if rows else np.zeros((0, lp.n))
    for j, (plus, minus) in enumerate(column_map):
        A[:, plus] = source[:, j]
        c[plus] = lp.c[j]
        if minus is not None:
            A[:, minus] = -source[:, j]
            c[minus] = -lp.c[j]

    slack_columns: List[Optional[int]] = [None] * m_eq
    for k in range(m_ineq):
        A[m_eq + k, width + k] = 1.0
        slack_columns.append(width + k)

    b = np.concatenate([lp.b_eq, lp.d_ineq]) if rows else np.zeros(0)
    negative = b < 0
    A[negative] *= -1.0
    b = np.where(negative, -b, b)

    return StandardForm(A=A, b=b, c=c, column_map=column_map, slack_columns=slack_columns)


class Tableau:
    """Dense simplex tableau.

    The last column holds the right hand side and the last row the reduced
    costs; the cost row's rhs entry is minus the objective value.
    """

    def __init__(self, A: np.ndarray, b: np.ndarray, c: np.ndarray, basis: List[int]):
        m, n = A.shape
        self.T = np.zeros((m + 1, n + 1))
        self.T[:m, :n] = A
        self.T[:m, n] = b
        self.basis = list(basis)
        self.set_cost(c)

    @property
    def rows(self) -> int:
        return self.T.shape[0] - 1

    @property
    def cols(self) -> int:
        return self.T.shape[1] - 1

    @property
    def body(self) -> np.ndarray:
        return self.T[:-1, :-1]

    @property
    def rhs(self) -> np.ndarray:
        return self.T[:-1, -1]

    @property
    def cost_row(self) -> np.ndarray:
        return self.T[-1, :-1]

    @property
    def objective(self) -> float:
        return float(-self.T[-1, -1])

    def set_cost(self, c: np.ndarray):
        """Install a cost vector and price out the basic columns."""
        self.T[-1, :-1] = c
        self.T[-1, -1] = 0.0
        for i, j in enumerate(self.basis):
            if self.T[-1, j] != 0.0:
                self.T[-1] -= self.T[-1, j] * self.T[i]

    def pivot(self, row: int, col: int):
        """Gauss-Jordan elimination making column `col` the unit vector of `row`."""
        self.T[row] /= self.T[row, col]
        column = self.T[:, col].copy()
        column[row] = 0.0
        touched = np.flatnonzero(column)
        if touched.size:
            self.T[touched] -= np.outer(column[touched], self.T[row])
        self.T[touched, col] = 0.0
        rhs = self.T[:-1, -1]
        rhs[(rhs < 0.0) & (rhs > -RHS_TOL)] = 0.0
        self.basis[row] = col

    def solution(self) -> np.ndarray:
        z = np.zeros(self.cols)
        z[self.basis] = self.rhs
        return z


class _PivotLoop:
    """Shared iteration budget and callback across both phases."""

    def __init__(self, max_iter: int, on_pivot: Optional[PivotCallback] = None):
        self.max_iter = max_iter
        self.iterations = 0
        self.on_pivot = on_pivot

    def run(self, tab: Tableau, phase: int):
        """Pivot until no reduced cost is negative."""
        m, n = tab.rows, tab.cols
        threshold = 2 * (m + n)
        degenerate = 0
        bland = False

        while True:
            reduced = tab.cost_row
            if bland:
                candidates = np.flatnonzero(reduced < -COST_TOL)
                if candidates.size == 0:
                    return
                col = int(candidates[0])
            else:
                col = int(np.argmin(reduced)) if n else 0
                if n == 0 or reduced[col] >= -COST_TOL:
                    return

            column = tab.body[:, col]
            positive = np.flatnonzero(column > PIVOT_EPS)
            if positive.size == 0:
                raise UnboundedError(f"column {col} has no positive entry (phase {phase})")

            ratios = tab.rhs[positive] / column[positive]
            best = ratios.min()
            ties = positive[ratios <= best + 1e-12 * (1.0 + abs(best))]
            if bland:
                row = int(min(ties, key=lambda r: tab.basis[r]))
            else:
                row = int(ties[0])

            if self.iterations >= self.max_iter:
                raise IterationLimitError(
                    f"simplex exceeded {self.max_iter} pivots", iterations=self.iterations
                )
            if best <= RHS_TOL:
                degenerate += 1
                if not bland and degenerate > threshold:
                    logger.debug(f"Phase {phase}: {degenerate} degenerate pivots, switching to Bland's rule")
                    bland = True

            tab.pivot(row, col)
            self.iterations += 1
            if self.on_pivot is not None:
                self.on_pivot(phase, tab)


def _unit_basis(std: StandardForm) -> List[Optional[int]]:
    """For each row, a column that already is its unit vector (or None).

    A row's own slack is preferred; other unit columns only fill rows whose
    slack was negated or that have none.
    """
    A = std.A
    m = A.shape[0]
    basis: List[Optional[int]] = [None] * m
    for i, j in enumerate(std.slack_columns):
        if j is not None and A[i, j] == 1.0:
            basis[i] = j
    single = np.flatnonzero(np.count_nonzero(A, axis=0) == 1)
    for j in single:
        i = int(np.flatnonzero(A[:, j])[0])
        if basis[i] is None and A[i, j] == 1.0:
            basis[i] = int(j)
    return basis


def phase1(std: StandardForm, loop: Optional[_PivotLoop] = None) -> Tableau:
    """
    Find a basic feasible solution of a standard-form problem.

    Rows without a unit column get an artificial column; their sum is
    minimized. Afterwards artificials are pivoted out of the basis, or their
    rows dropped as redundant, and the returned tableau carries the real cost.

    Raises:
        InfeasibleError: the artificial objective cannot be driven to zero
    """
    loop = loop or _PivotLoop(max_iter=_default_budget(std))
    m, n = std.rows, std.cols
    basis = _unit_basis(std)
    missing = [i for i, j in enumerate(basis) if j is None]

    artificial = np.zeros((m, len(missing)))
    for k, i in enumerate(missing):
        artificial[i, k] = 1.0
        basis[i] = n + k
    cost = np.concatenate([np.zeros(n), np.ones(len(missing))])
    tab = Tableau(np.hstack([std.A, artificial]), std.b, cost, basis)

    if missing:
        loop.run(tab, phase=1)
        tol = max(PHASE1_TOL, 1e-12 * float(np.sum(std.b)))
        if tab.objective > tol:
            raise InfeasibleError(f"phase-I optimum {tab.objective:.3e} is positive")

    keep = []
    for i in range(m):
        if tab.basis[i] < n:
            keep.append(i)
            continue
        row = tab.T[i, :n]
        nonzero = np.flatnonzero(np.abs(row) > PIVOT_EPS)
        if nonzero.size:
            tab.pivot(i, int(nonzero[np.argmax(np.abs(row[nonzero]))]))
            keep.append(i)
        else:
            logger.debug(f"Phase I: dropping redundant row {i}")

    feasible = Tableau(tab.T[keep, :n], tab.T[keep, -1], std.c, [tab.basis[i] for i in keep])
    logger.debug(f"Phase I done: {len(missing)} artificials, {m - len(keep)} redundant rows")
    return feasible


def _default_budget(std: StandardForm) -> int:
    return 50 * (std.rows + std.cols) + 100


def solve_lp(
    lp: LpProblem,
    max_iter: Optional[int] = None,
    on_pivot: Optional[PivotCallback] = None,
) -> OptimizationResult:
    """
    Solve an LP with the two-phase simplex method.

    Args:
        lp: problem to solve
        max_iter: pivot budget over both phases (0 or None scales with size)
        on_pivot: called as on_pivot(phase, tableau) after every pivot

    Returns:
        OptimizationResult with status optimal, infeasible, unbounded or iteration_limit
    """
    std = to_standard_form(lp)
    loop = _PivotLoop(max_iter or _default_budget(std), on_pivot)
    x = np.zeros(lp.n)

    try:
        tab = phase1(std, loop)
        loop.run(tab, phase=2)
    except InfeasibleError as e:
        logger.info(f"LP infeasible: {e}")
        return OptimizationResult(x=x, status=SolveStatus.INFEASIBLE,
                                  iterations=loop.iterations, message=str(e))
    except UnboundedError as e:
        logger.info(f"LP unbounded: {e}")
        return OptimizationResult(x=x, status=SolveStatus.UNBOUNDED,
                                  iterations=loop.iterations, message=str(e))
    except IterationLimitError as e:
        logger.warning(f"LP stopped: {e}")
        return OptimizationResult(x=x, status=SolveStatus.ITERATION_LIMIT,
                                  iterations=loop.iterations, message=str(e))

    x = std.recover(tab.solution())
    return OptimizationResult(
        x=x,
        status=SolveStatus.OPTIMAL,
        iterations=loop.iterations,
        objective=lp.objective(x),
        stats={"rows": std.rows, "cols": std.cols},
    )


def find_feasible_point(A_eq: np.ndarray, b_eq: np.ndarray,
                        C_ineq: np.ndarray, d_ineq: np.ndarray) -> np.ndarray:
    """
    Basic feasible point of {A_eq x = b_eq, C_ineq x <= d_ineq} over free x.

    Raises:
        InfeasibleError: the system has no solution
    """
    n = A_eq.shape[1]
    lp = LpProblem.from_arrays(np.zeros(n), A_eq, b_eq, C_ineq, d_ineq,
                               nonneg=np.zeros(n, dtype=bool))
    std = to_standard_form(lp)
    tab = phase1(std)
    return std.recover(tab.solution())


class SimplexSolver(LayoutSolver):
    """Two-phase simplex on the linearly weighted LP."""

    strategy = Strategy.SIMPLEX

    def __init__(self, max_iter: int = 0, **options):
        super().__init__(**options)
        self.max_iter = max_iter

    def lower(self, spec: LayoutSpec) -> LpProblem:
        return to_lp(spec)

    def solve_problem(self, problem: LpProblem) -> OptimizationResult:
        return solve_lp(problem, self.max_iter)
