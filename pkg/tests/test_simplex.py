import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.errors import InfeasibleError
from app.core.schemas import SolveStatus, Strategy
from app.solvers.simplex import (
    SimplexSolver, Tableau, find_feasible_point, phase1, solve_lp, to_standard_form,
)
from app.transform.lowering import LpProblem, to_lp


class TestStandardForm:

    def test_inequality_gets_slack(self):
        std = to_standard_form(LpProblem.from_arrays([0.0], C_ineq=[[1.0]], d_ineq=[4.0]))
        assert_allclose(std.A, [[1.0, 1.0]])
        assert_allclose(std.b, [4.0])
        assert std.slack_columns == [1]

    def test_free_variable_is_split_and_row_negated(self):
        lp = LpProblem.from_arrays([1.0], A_eq=[[1.0]], b_eq=[-3.0], nonneg=[False])
        std = to_standard_form(lp)
        assert_allclose(std.A, [[-1.0, 1.0]])
        assert_allclose(std.b, [3.0])
        assert_allclose(std.c, [1.0, -1.0])
        assert std.column_map == [(0, 1)]
        assert std.recover(np.array([0.0, 3.0])) == pytest.approx([-3.0])

    def test_three_button(self, three_button):
        std = to_standard_form(to_lp(three_button))
        assert std.rows == 4
        assert std.cols == 12
        assert np.all(std.b >= 0)


class TestTableau:

    def test_pivot_makes_unit_column(self):
        tab = Tableau(np.array([[1.0, 1.0, 1.0, 0.0], [2.0, 1.0, 0.0, 1.0]]),
                      np.array([4.0, 6.0]), np.array([-1.0, -1.0, 0.0, 0.0]), [2, 3])
        assert tab.objective == 0.0
        tab.pivot(1, 0)
        assert_allclose(tab.body[:, 0], [0.0, 1.0])
        assert tab.cost_row[0] == 0.0
        assert tab.basis == [2, 0]
        assert_allclose(tab.solution(), [3.0, 0.0, 1.0, 0.0])
        assert tab.objective == pytest.approx(-3.0)


class TestSolveLp:

    def test_textbook_maximization(self):
        lp = LpProblem.from_arrays(
            [-3.0, -5.0],
            C_ineq=[[1.0, 0.0], [0.0, 2.0], [3.0, 2.0]],
            d_ineq=[4.0, 12.0, 18.0],
        )
        result = solve_lp(lp)
        assert result.status is SolveStatus.OPTIMAL
        assert result.x == pytest.approx([2.0, 6.0])
        assert result.objective == pytest.approx(-36.0)

    def test_unbounded(self):
        result = solve_lp(LpProblem.from_arrays([-1.0]))
        assert result.status is SolveStatus.UNBOUNDED

    def test_infeasible(self):
        result = solve_lp(LpProblem.from_arrays([0.0, 0.0], A_eq=[[1.0, 1.0]], b_eq=[-1.0]))
        assert result.status is SolveStatus.INFEASIBLE

    def test_feasible_start_needs_no_phase_one(self):
        lp = LpProblem.from_arrays([1.0, 1.0], C_ineq=[[1.0, 1.0]], d_ineq=[5.0])
        phases = []
        result = solve_lp(lp, on_pivot=lambda phase, tab: phases.append(phase))
        assert result.status is SolveStatus.OPTIMAL
        assert result.iterations == 0
        assert phases == []
        assert result.x == pytest.approx([0.0, 0.0])

    def test_iteration_limit(self):
        lp = LpProblem.from_arrays(
            [-3.0, -5.0],
            C_ineq=[[1.0, 0.0], [0.0, 2.0], [3.0, 2.0]],
            d_ineq=[4.0, 12.0, 18.0],
        )
        result = solve_lp(lp, max_iter=1)
        assert result.status is SolveStatus.ITERATION_LIMIT

    def test_tableau_invariants_hold_after_every_pivot(self):
        lp = LpProblem.from_arrays(
            [-1.0, -2.0, 1.0],
            A_eq=[[1.0, 1.0, 1.0]],
            b_eq=[4.0],
            C_ineq=[[1.0, -1.0, 0.0], [0.0, 1.0, 2.0]],
            d_ineq=[2.0, 5.0],
        )
        seen = []

        def check(phase, tab):
            seen.append(phase)
            assert np.all(tab.rhs >= 0.0)
            basic = tab.body[:, tab.basis]
            assert_allclose(basic, np.eye(tab.rows), atol=1e-12)
            assert_allclose(tab.cost_row[tab.basis], 0.0, atol=1e-12)

        result = solve_lp(lp, on_pivot=check)
        assert result.status is SolveStatus.OPTIMAL
        assert seen == sorted(seen)
        assert result.objective == pytest.approx(-8.0)

    def test_objective_never_increases_within_a_phase(self, make_lp):
        for _ in range(100):
            lp = make_lp()
            trace = []
            result = solve_lp(lp, on_pivot=lambda phase, tab: trace.append((phase, tab.objective)))
            for (phase_a, a), (phase_b, b) in zip(trace, trace[1:]):
                if phase_a == phase_b:
                    assert b <= a + 1e-9 * (1.0 + abs(a))
            phase_two = [value for phase, value in trace if phase == 2]
            if result.status is SolveStatus.OPTIMAL and phase_two:
                assert phase_two[-1] == pytest.approx(result.objective, abs=1e-7)

    def test_degenerate_problem_terminates(self):
        # A classic cycling example under Dantzig pricing with lowest-row ties.
        lp = LpProblem.from_arrays(
            [-0.75, 150.0, -0.02, 6.0],
            C_ineq=[
                [0.25, -60.0, -0.04, 9.0],
                [0.5, -90.0, -0.02, 3.0],
                [0.0, 0.0, 1.0, 0.0],
            ],
            d_ineq=[0.0, 0.0, 1.0],
        )
        result = solve_lp(lp)
        assert result.status is SolveStatus.OPTIMAL
        assert result.objective == pytest.approx(-0.05)

    def test_three_button(self, three_button):
        solution = SimplexSolver().solve(three_button)
        assert solution.status is SolveStatus.OPTIMAL
        assert sum(solution.x) == pytest.approx(300.0)
        assert sum(solution.errors[1:]) == pytest.approx(60.0)
        assert solution.objective == pytest.approx(60.0)
        assert solution.strategy is Strategy.SIMPLEX


class TestPhaseOne:

    def test_infeasible_system(self):
        lp = LpProblem.from_arrays([0.0, 0.0], A_eq=[[1.0, 1.0]], b_eq=[-1.0])
        with pytest.raises(InfeasibleError):
            phase1(to_standard_form(lp))

    def test_redundant_row_is_dropped(self):
        lp = LpProblem.from_arrays([1.0, 1.0], A_eq=[[1.0, 1.0], [2.0, 2.0]], b_eq=[2.0, 4.0])
        tab = phase1(to_standard_form(lp))
        assert tab.rows == 1
        assert np.sum(tab.solution()) == pytest.approx(2.0)

    def test_find_feasible_point(self):
        x = find_feasible_point(np.array([[1.0, 1.0]]), np.array([2.0]),
                                np.array([[-1.0, 0.0]]), np.array([-3.0]))
        assert x[0] + x[1] == pytest.approx(2.0)
        assert x[0] >= 3.0 - 1e-9

    def test_find_feasible_point_infeasible(self):
        with pytest.raises(InfeasibleError):
            find_feasible_point(np.zeros((0, 1)), np.zeros(0),
                                np.array([[1.0], [-1.0]]), np.array([0.0, -1.0]))
