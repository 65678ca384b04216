import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_almost_equal

from app.core.schemas import SolveStatus, Strategy
from app.solvers.active_set import (
    ActiveSet, ActiveSetSolver, eq_subproblem, solve_qp_as, step_length_alpha,
)
from app.transform.lowering import QpProblem


def _textbook_qp() -> QpProblem:
    """min (x1 - 1)^2 + (x2 - 2.5)^2 over a pentagon; the minimizer is (1.4, 1.7)."""
    return QpProblem.from_arrays(
        2.0 * np.eye(2),
        g=[2.0, 5.0],
        C_ineq=[[-1.0, 2.0], [1.0, 2.0], [1.0, -2.0], [-1.0, 0.0], [0.0, -1.0]],
        d_ineq=[2.0, 6.0, 2.0, 0.0, 0.0],
    )


class TestActiveSet:

    def test_keeps_insertion_order(self):
        active = ActiveSet([3, 1])
        active.add(2)
        assert active.indices == [3, 1, 2]
        active.remove(1)
        assert list(active) == [3, 2]
        assert 2 in active and 1 not in active
        assert len(active) == 2

    def test_duplicate_add(self):
        active = ActiveSet([0])
        with pytest.raises(ValueError):
            active.add(0)


class TestEqSubproblem:

    def test_unconstrained_newton_step(self):
        delta, lam = eq_subproblem(np.eye(2), [2.0, 0.0], np.zeros((0, 2)))
        assert_array_almost_equal(delta, [-2.0, 0.0])
        assert lam.shape == (0,)

    def test_stationary_point(self):
        delta, lam = eq_subproblem(np.eye(2), [0.0, 0.0], np.array([[1.0, 1.0]]))
        assert_array_almost_equal(delta, [0.0, 0.0])
        assert_array_almost_equal(lam, [0.0])

    def test_step_stays_on_working_set(self):
        W = np.array([[1.0, 1.0]])
        delta, lam = eq_subproblem(np.eye(2), [1.0, 0.0], W)
        assert W @ delta == pytest.approx([0.0])
        assert_allclose(delta + W.T @ lam, [-1.0, 0.0])


class TestStepLength:

    def test_blocking_row(self):
        alpha, blocking = step_length_alpha([[1.0]], [4.0], [2.0], [4.0], ActiveSet())
        assert alpha == pytest.approx(0.5)
        assert blocking == 0

    def test_moving_away(self):
        assert step_length_alpha([[1.0]], [4.0], [2.0], [-1.0], ActiveSet()) == (1.0, None)

    def test_on_the_boundary(self):
        alpha, blocking = step_length_alpha([[1.0]], [4.0], [4.0], [1.0], ActiveSet())
        assert alpha == 0.0
        assert blocking == 0

    def test_active_rows_are_skipped(self):
        C = [[1.0, 0.0], [0.0, 1.0]]
        alpha, blocking = step_length_alpha(C, [1.0, 1.0], [0.0, 0.0], [2.0, 4.0], ActiveSet([1]))
        assert alpha == pytest.approx(0.5)
        assert blocking == 0

    def test_ties_go_to_lowest_row(self):
        C = [[1.0, 0.0], [0.0, 1.0]]
        alpha, blocking = step_length_alpha(C, [1.0, 1.0], [0.0, 0.0], [2.0, 2.0], ActiveSet())
        assert alpha == pytest.approx(0.5)
        assert blocking == 0

    def test_full_step(self):
        assert step_length_alpha([[1.0]], [4.0], [0.0], [2.0], ActiveSet()) == (1.0, None)


class TestSolveQpAs:

    def test_textbook_problem(self):
        result = solve_qp_as(_textbook_qp())
        assert result.status is SolveStatus.OPTIMAL
        assert result.x == pytest.approx([1.4, 1.7], abs=1e-6)
        assert all(m >= 0.0 for m in result.stats["multipliers"])

    def test_textbook_problem_from_a_vertex(self):
        result = solve_qp_as(_textbook_qp(), x0=[2.0, 0.0])
        assert result.status is SolveStatus.OPTIMAL
        assert result.x == pytest.approx([1.4, 1.7], abs=1e-6)

    def test_blocking_then_stop(self):
        # min x^2 s.t. x >= 1 from x = 3: block at alpha = 2/3, then stop with lambda = 2.
        qp = QpProblem.from_arrays([[2.0]], C_ineq=[[-1.0]], d_ineq=[-1.0])
        result = solve_qp_as(qp, x0=[3.0])
        assert result.status is SolveStatus.OPTIMAL
        assert result.x == pytest.approx([1.0])
        assert result.iterations == 2
        assert result.stats["active"] == [0]
        assert result.stats["multipliers"] == pytest.approx([2.0])

    def test_infeasible(self):
        qp = QpProblem.from_arrays([[1.0]], C_ineq=[[1.0], [-1.0]], d_ineq=[0.0, -1.0])
        assert solve_qp_as(qp).status is SolveStatus.INFEASIBLE

    def test_iteration_limit(self):
        result = solve_qp_as(_textbook_qp(), max_iter=1, x0=[2.0, 0.0])
        assert result.status is SolveStatus.ITERATION_LIMIT

    def test_kkt_conditions_at_termination(self, make_qp):
        for _ in range(50):
            qp = make_qp()
            result = solve_qp_as(qp)
            assert result.status is SolveStatus.OPTIMAL
            x = result.x
            if qp.m_ineq:
                assert np.all(qp.C_ineq @ x - qp.d_ineq <= 1e-7)
            if qp.m_eq:
                assert_allclose(qp.A_eq @ x, qp.b_eq, atol=1e-7)

            # Q x - g + A^T mu + C_W^T lambda = 0 with lambda >= 0
            rows = result.stats["active"]
            lam = np.asarray(result.stats["multipliers"])
            assert np.all(lam >= -1e-9)
            W = np.vstack([qp.A_eq, qp.C_ineq[rows]])
            if W.shape[0] == 0:
                assert_allclose(qp.gradient(x), 0.0, atol=1e-6)
                continue
            mu, *_ = np.linalg.lstsq(W.T, -qp.gradient(x), rcond=None)
            assert_allclose(W.T @ mu, -qp.gradient(x), atol=1e-6)

    def test_three_button(self, three_button):
        solution = ActiveSetSolver().solve(three_button)
        assert solution.status is SolveStatus.OPTIMAL
        assert solution.x == pytest.approx([100.0, 100.0, 100.0], abs=1e-6)
        assert solution.strategy is Strategy.ACTIVE_SET

    def test_repeated_equality_rows(self):
        qp = QpProblem.from_arrays(np.diag([0.0, 2.0]), g=[0.0, 14.0],
                                   A_eq=[[1.0, 0.0], [1.0, 0.0]], b_eq=[5.0, 5.0],
                                   C_ineq=[[0.0, 1.0]], d_ineq=[6.0])
        result = solve_qp_as(qp)
        assert result.status is SolveStatus.OPTIMAL
        assert result.x == pytest.approx([5.0, 6.0], abs=1e-9)
        assert result.stats["multipliers"] == pytest.approx([2.0])

    def test_iterates_stay_feasible_with_independent_working_sets(self, make_qp):
        for _ in range(50):
            qp = make_qp()
            seen = []

            def check(iteration, x, active):
                seen.append(iteration)
                if qp.m_eq:
                    assert_allclose(qp.A_eq @ x, qp.b_eq, atol=1e-8)
                if qp.m_ineq:
                    assert np.all(qp.C_ineq @ x - qp.d_ineq <= 1e-8)
                rows = active.indices
                gap = qp.C_ineq[rows] @ x - qp.d_ineq[rows]
                assert np.all(np.abs(gap) <= 1e-7 * (1.0 + np.abs(qp.d_ineq[rows])))
                W = np.vstack([qp.A_eq, qp.C_ineq[rows]])
                if W.shape[0]:
                    assert np.linalg.matrix_rank(W) == W.shape[0]

            result = solve_qp_as(qp, on_iterate=check)
            assert result.status is SolveStatus.OPTIMAL
            assert seen == list(range(1, len(seen) + 1))
