"""Barrier interior point method for convex QPs.

The outer loop raises the barrier weight t geometrically; each centering
runs equality-constrained Newton on t * q(x) - sum(log(d - C x)). While
inequality rows are present a weak proximal term around the starting point
is added, so that directions q leaves flat cannot drive the log barrier to
minus infinity. Its pull on the result fades as 1/t.
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import linalg

from app.core.errors import (
    InfeasibleError, IterationLimitError, NonFiniteError, SingularMatrixError,
)
from app.core.schemas import BarrierParams, LayoutSpec, OptimizationResult, SolveStatus, Strategy
from app.linalg.dense import solve_kkt
from app.solvers.base import LayoutSolver
from app.transform.lowering import QpProblem, to_qp

logger = logging.getLogger(__name__)

EQ_TOL = 1e-8
INTERIOR_MARGIN = 1e-9
PROXIMAL_WEIGHT = 1e-6
FALLBACK_REGULARIZATION = 1e-10
# relative size of the rounding error in a composite value
ROUNDOFF = 1e-13
SHRINK = 0.5
SUFFICIENT_DECREASE = 1e-4
BOUNDARY_FRACTION = 0.99
MIN_STEP = 1e-14

IterateCallback = Callable[[int, float, np.ndarray], None]
StepCallback = Callable[[np.ndarray, float], None]


class _Barrier:
    """t * q(x) + rho/2 |x - anchor|^2 - sum(log(d - C x)) restricted to {A x = b}.

    rho is PROXIMAL_WEIGHT when there are inequality rows and 0 otherwise.
    """

    def __init__(self, Q, g, A, C, d, params: BarrierParams, anchor,
                 stop: Optional[Callable[[np.ndarray], bool]] = None,
                 on_step: Optional[StepCallback] = None):
        self.Q, self.g, self.A, self.C, self.d = Q, g, A, C, d
        self.params = params
        self.anchor = np.array(anchor, dtype=float)
        self.rho = PROXIMAL_WEIGHT if C.shape[0] else 0.0
        self.stop = stop
        self.on_step = on_step
        self.newton_steps = 0

    @property
    def m(self) -> int:
        return self.C.shape[0]

    def evaluate(self, x: np.ndarray, t: float) -> Tuple[float, float]:
        """(value, magnitude of its terms); the value is inf outside the interior."""
        r = self.d - self.C @ x
        if np.any(r <= 0.0):
            return np.inf, np.inf
        objective = t * float(0.5 * x @ self.Q @ x - self.g @ x)
        prox = 0.5 * self.rho * float(np.sum((x - self.anchor) ** 2))
        logs = np.log(r)
        value = objective + prox - float(np.sum(logs))
        return value, 1.0 + abs(objective) + prox + float(np.sum(np.abs(logs)))

    def _max_step(self, r: np.ndarray, dx: np.ndarray) -> float:
        rate = self.C @ dx
        toward = rate > 0.0
        if not np.any(toward):
            return 1.0
        return min(1.0, BOUNDARY_FRACTION * float(np.min(r[toward] / rate[toward])))

    def newton_step(self, H: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """Newton direction on {A dx = 0}, solved on the unit-diagonal rescaling of H."""
        n = H.shape[0]
        diag = np.diag(H)
        scale = 1.0 / np.sqrt(np.where(diag > 0.0, diag, 1.0))
        Hs = H * np.outer(scale, scale)
        As = self.A * scale
        if As.shape[0]:
            norms = np.linalg.norm(As, axis=1)
            As = As / np.where(norms > 0.0, norms, 1.0)[:, None]
        rhs = -grad * scale
        try:
            y, _ = solve_kkt(Hs, As, rhs)
        except SingularMatrixError:
            logger.debug("Newton system singular after scaling, retrying regularized")
            y, _ = solve_kkt(Hs + FALLBACK_REGULARIZATION * np.eye(n), As, rhs)
        return y * scale

    def center(self, x: np.ndarray, t: float) -> Tuple[np.ndarray, bool]:
        """Newton centering from a strictly feasible x. Returns (x, stopped early)."""
        n = x.shape[0]
        for _ in range(self.params.max_inner):
            r = self.d - self.C @ x
            inv = 1.0 / r
            grad = t * (self.Q @ x - self.g) + self.rho * (x - self.anchor) + self.C.T @ inv
            H = t * self.Q + (self.C.T * inv ** 2) @ self.C
            if self.rho:
                H[np.diag_indices(n)] += self.rho
            dx = self.newton_step(H, grad)
            decrement = float(dx @ H @ dx)
            f0, magnitude = self.evaluate(x, t)

            # below the rounding floor the decrement carries no information
            if decrement / 2.0 <= max(self.params.newton_tol, ROUNDOFF * magnitude):
                polished = x + dx
                if self.m == 0 or np.all(self.d - self.C @ polished > 0.0):
                    x = polished
                return x, False

            step = self._max_step(r, dx)
            slope = float(grad @ dx)
            f1 = self.evaluate(x + step * dx, t)[0]
            while f1 > f0 + SUFFICIENT_DECREASE * step * slope:
                step *= SHRINK
                if step < MIN_STEP:
                    logger.debug(f"Line search stalled at t={t:g}, decrement {decrement:.3e}")
                    return x, False
                f1 = self.evaluate(x + step * dx, t)[0]

            x = x + step * dx
            self.newton_steps += 1
            if self.on_step is not None:
                self.on_step(x, f1)
            if self.stop is not None and self.stop(x):
                return x, True
            if f0 - f1 <= ROUNDOFF * magnitude:
                logger.debug(f"Centering stagnated at t={t:g}, decrement {decrement:.3e}")
                return x, False

        raise IterationLimitError(
            f"centering did not converge in {self.params.max_inner} Newton steps at t={t:g}",
            iterations=self.newton_steps,
        )

    def follow_path(self, x: np.ndarray, on_iterate: Optional[IterateCallback] = None
                    ) -> Tuple[np.ndarray, int]:
        """Outer loop over t = t0 * mu^k; returns (x, centerings performed)."""
        t = self.params.t0
        for outer in range(self.params.max_outer):
            x, stopped = self.center(x, t)
            if on_iterate is not None:
                on_iterate(outer, t, x)
            if stopped or self.m == 0 or self.m / t < self.params.eps:
                return x, outer + 1
            t *= self.params.mu
        raise IterationLimitError(
            f"barrier method did not reach m/t < {self.params.eps:g} in {self.params.max_outer} outer steps",
            iterations=self.newton_steps,
        )


def _least_squares_start(qp: QpProblem) -> np.ndarray:
    if qp.m_eq == 0:
        return np.zeros(qp.n)
    x, *_ = linalg.lstsq(qp.A_eq, qp.b_eq)
    gap = float(np.max(np.abs(qp.A_eq @ x - qp.b_eq)))
    if gap > EQ_TOL * (1.0 + float(np.max(np.abs(qp.b_eq)))):
        raise InfeasibleError(f"equality rows are inconsistent (residual {gap:.3e})")
    return x


def _phase_one(qp: QpProblem, x0: np.ndarray, params: BarrierParams) -> np.ndarray:
    """Strictly interior point from x0, which satisfies the (independent) equality rows."""
    if qp.m_ineq == 0:
        return x0
    violation = qp.C_ineq @ x0 - qp.d_ineq
    if float(np.max(violation)) < -INTERIOR_MARGIN:
        return x0

    n, m = qp.n, qp.m_ineq
    C1 = np.zeros((m + 1, n + 1))
    C1[:m, :n] = qp.C_ineq
    C1[:m, n] = -1.0
    C1[m, n] = -1.0
    d1 = np.concatenate([qp.d_ineq, [1.0]])
    A1 = np.hstack([qp.A_eq, np.zeros((qp.m_eq, 1))])
    g1 = np.zeros(n + 1)
    g1[n] = -1.0

    def interior(z: np.ndarray) -> bool:
        return z[n] < 0.0 and float(np.max(qp.C_ineq @ z[:n] - qp.d_ineq)) < -INTERIOR_MARGIN

    z0 = np.concatenate([x0, [float(np.max(violation)) + 1.0]])
    barrier = _Barrier(np.zeros((n + 1, n + 1)), g1, A1, C1, d1, params, anchor=z0, stop=interior)
    z, _ = barrier.follow_path(z0)
    logger.debug(f"Phase I: s={z[n]:.3e} after {barrier.newton_steps} Newton steps")

    if not interior(z):
        raise InfeasibleError(f"no strictly interior point (phase-I bound {z[n]:.3e})")
    return z[:n]


def find_strictly_feasible(qp: QpProblem, params: Optional[BarrierParams] = None) -> np.ndarray:
    """
    Point satisfying the equality rows with every inequality row strictly slack.

    Starts from the least-squares solution of the equality rows. If that is
    not interior, minimizes the auxiliary bound s in C x - d <= s, s >= -1,
    with the barrier method itself, stopping as soon as s < 0.

    Raises:
        InfeasibleError: the equality rows are inconsistent, or the smallest
            achievable s is not negative
    """
    params = params or BarrierParams()
    x0 = _least_squares_start(qp)
    return _phase_one(qp.with_independent_equalities(), x0, params)


def centering_step(qp: QpProblem, x, t: float, params: Optional[BarrierParams] = None,
                   on_step: Optional[StepCallback] = None) -> np.ndarray:
    """
    Approximate minimizer of t * q(x) + barrier on {A_eq x = b_eq}, from a strictly feasible x.

    `on_step(x, value)` sees every accepted Newton iterate with its composite value.

    Raises:
        IterationLimitError: max_inner Newton steps exhausted
    """
    if t <= 0:
        raise ValueError(f"barrier weight must be positive, got {t}")
    params = params or BarrierParams()
    qp = qp.with_independent_equalities()
    x = np.asarray(x, dtype=float)
    barrier = _Barrier(qp.Q, qp.g, qp.A_eq, qp.C_ineq, qp.d_ineq, params, anchor=x, on_step=on_step)
    x, _ = barrier.center(x, t)
    return x


def solve_qp_ip(
    qp: QpProblem,
    params: Optional[BarrierParams] = None,
    on_iterate: Optional[IterateCallback] = None,
) -> OptimizationResult:
    """
    Solve a convex QP with the barrier method.

    Args:
        qp: problem to solve
        params: barrier parameters (defaults when omitted)
        on_iterate: called as on_iterate(outer_index, t, x) after every centering

    Returns:
        OptimizationResult; iterations counts Newton steps of the main path
    """
    params = params or BarrierParams()
    x = np.zeros(qp.n)
    try:
        x = _least_squares_start(qp)
        qp = qp.with_independent_equalities()
        x = _phase_one(qp, x, params)
        if qp.is_feasibility_only:
            return OptimizationResult(x=x, status=SolveStatus.OPTIMAL, iterations=0,
                                      objective=qp.objective(x), stats={"outer": 0})
        barrier = _Barrier(qp.Q, qp.g, qp.A_eq, qp.C_ineq, qp.d_ineq, params, anchor=x)
        x, outer = barrier.follow_path(x, on_iterate)
    except InfeasibleError as e:
        logger.info(f"QP infeasible: {e}")
        return OptimizationResult(x=x, status=SolveStatus.INFEASIBLE, message=str(e))
    except IterationLimitError as e:
        logger.warning(f"Barrier method stopped: {e}")
        return OptimizationResult(x=x, status=SolveStatus.ITERATION_LIMIT,
                                  iterations=e.iterations, message=str(e))
    except (SingularMatrixError, NonFiniteError) as e:
        logger.warning(f"Barrier method hit a numerical failure: {e}")
        return OptimizationResult(x=x, status=SolveStatus.NUMERICAL_ERROR, message=str(e))

    logger.debug(f"Barrier method: {outer} centerings, {barrier.newton_steps} Newton steps")
    return OptimizationResult(
        x=x,
        status=SolveStatus.OPTIMAL,
        iterations=barrier.newton_steps,
        objective=qp.objective(x),
        stats={"outer": outer},
    )


class InteriorPointSolver(LayoutSolver):
    """Barrier method on the squared-slack QP."""

    strategy = Strategy.INTERIOR_POINT

    def __init__(self, params: Optional[BarrierParams] = None, **options):
        super().__init__(**options)
        self.params = params or BarrierParams()

    def lower(self, spec: LayoutSpec) -> QpProblem:
        return to_qp(spec)

    def solve_problem(self, problem: QpProblem) -> OptimizationResult:
        return solve_qp_ip(problem, self.params)
