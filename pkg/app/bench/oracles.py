"""Brute-force reference solvers for small problems.

Both enumerate combinatorially (active subsets, bases) and are only meant
to check the real solvers on tiny random instances.
"""

import logging
from itertools import combinations

import numpy as np

from app.core.errors import InfeasibleError, SingularMatrixError, UnboundedError
from app.linalg.dense import independent_rows, lu_solve, solve_kkt
from app.solvers.simplex import to_standard_form
from app.transform.lowering import LpProblem, QpProblem

logger = logging.getLogger(__name__)

FEAS_TOL = 1e-7
MULTIPLIER_TOL = -1e-9
COST_TOL = 1e-9
MAX_QP_VARS = 10
MAX_QP_ROWS = 12
MAX_LP_COLUMNS = 12


def qp_oracle(qp: QpProblem) -> np.ndarray:
    """
    Minimizer of a small convex QP by enumerating candidate active sets.

    Every subset of inequality rows is tried as an equality system; the
    feasible KKT points with nonnegative multipliers compete on objective.

    Raises:
        InfeasibleError: no candidate is feasible
    """
    if qp.n > MAX_QP_VARS or qp.m_ineq > MAX_QP_ROWS:
        raise ValueError(f"qp_oracle is limited to {MAX_QP_VARS} variables and {MAX_QP_ROWS} rows")

    best_x, best_value = None, np.inf
    scale = 1.0 + float(np.max(np.abs(np.concatenate([qp.b_eq, qp.d_ineq, [0.0]]))))
    for k in range(qp.m_ineq + 1):
        for subset in combinations(range(qp.m_ineq), k):
            rows = list(subset)
            W = np.vstack([qp.A_eq, qp.C_ineq[rows]])
            if W.shape[0] > qp.n:
                continue
            rhs = np.concatenate([qp.b_eq, qp.d_ineq[rows]])
            try:
                x, lam = solve_kkt(qp.Q, W, qp.g, rhs)
            except SingularMatrixError:
                continue

            if qp.m_eq and np.max(np.abs(qp.A_eq @ x - qp.b_eq)) > FEAS_TOL * scale:
                continue
            if qp.m_ineq and np.max(qp.C_ineq @ x - qp.d_ineq) > FEAS_TOL * scale:
                continue
            if np.any(lam[qp.m_eq:] < MULTIPLIER_TOL):
                continue

            value = qp.objective(x)
            if value < best_value:
                best_x, best_value = x, value

    if best_x is None:
        raise InfeasibleError("no feasible KKT point among the candidate active sets")
    return best_x


def lp_oracle(lp: LpProblem) -> float:
    """
    Optimal value of a small LP by enumerating every basis of its standard form.

    Raises:
        InfeasibleError: no basic solution is feasible
        UnboundedError: a feasible basis has an improving extreme ray
    """
    std = to_standard_form(lp)
    if std.cols > MAX_LP_COLUMNS:
        raise ValueError(f"lp_oracle is limited to {MAX_LP_COLUMNS} standard-form columns")
    A, b, c = std.A, std.b, std.c
    cols = std.cols
    rows = independent_rows(A, range(std.rows))
    A_r, b_r = A[rows], b[rows]
    m = len(rows)

    def feasible(z: np.ndarray) -> bool:
        return bool(np.all(z >= -FEAS_TOL) and np.all(np.abs(A @ z - b) <= FEAS_TOL * (1.0 + np.abs(b))))

    if m == 0:
        if not feasible(np.zeros(cols)):
            raise InfeasibleError("constraint rows cannot hold")
        if np.any(c < -COST_TOL):
            raise UnboundedError("a column with negative cost is unrestricted")
        return 0.0

    best = np.inf
    unbounded = False
    for basis in combinations(range(cols), m):
        B = list(basis)
        try:
            z_B = lu_solve(A_r[:, B], b_r)
        except SingularMatrixError:
            continue
        z = np.zeros(cols)
        z[B] = z_B
        if not feasible(z):
            continue
        best = min(best, float(c @ z))

        for j in range(cols):
            if j in basis:
                continue
            direction = -lu_solve(A_r[:, B], A_r[:, j])
            if np.all(direction >= -1e-12) and c[j] + c[B] @ direction < -COST_TOL:
                unbounded = True

    if not np.isfinite(best):
        raise InfeasibleError("no feasible basic solution")
    if unbounded:
        raise UnboundedError("feasible extreme ray with negative cost")
    return best
