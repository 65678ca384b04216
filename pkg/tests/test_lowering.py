import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.schemas import Constraint, LayoutSpec, Relation
from app.layout.generator import generate_layout
from app.layout.model import soft_objective
from app.transform.lowering import LpProblem, QpProblem, extend_for_lp, extend_for_qp, to_lp, to_qp


@pytest.fixture
def mixed_spec() -> LayoutSpec:
    """One constraint of every kind over two variables."""
    return LayoutSpec(var_count=2, constraints=(
        Constraint(terms=((0, 1.0), (1, 1.0)), relation=Relation.EQ, rhs=10.0),
        Constraint(terms=((0, 1.0),), relation=Relation.GE, rhs=1.0),
        Constraint(terms=((1, 1.0),), relation=Relation.LE, rhs=8.0, penalty=3.0),
        Constraint(terms=((0, 1.0),), relation=Relation.GE, rhs=4.0, penalty=2.0),
        Constraint(terms=((1, 2.0),), relation=Relation.EQ, rhs=5.0, penalty=0.5),
    ))


class TestToQp:

    def test_three_button_shape(self, three_button):
        qp = to_qp(three_button)
        assert qp.n == 6
        assert qp.m_eq == 4 and qp.m_ineq == 0
        assert_allclose(np.diag(qp.Q), [0, 0, 0, 2, 2, 2])
        assert not np.any(qp.g)
        assert qp.slack_map == {1: 3, 2: 4, 3: 5}

    def test_rows_of_every_kind(self, mixed_spec):
        qp = to_qp(mixed_spec)
        assert qp.n == 5
        # hard EQ and soft EQ are equalities
        assert qp.eq_origin == [0, 4]
        assert_allclose(qp.A_eq, [[1, 1, 0, 0, 0], [0, 2, 0, 0, 1]])
        # hard GE normalized, soft LE with sign row, soft GE with sign row
        assert qp.ineq_origin == [1, -1, 2, -1, 3]
        assert_allclose(qp.C_ineq[0], [-1, 0, 0, 0, 0])
        assert_allclose(qp.C_ineq[2], [0, 1, -1, 0, 0])
        assert_allclose(qp.C_ineq[4], [-1, 0, 0, -1, 0])
        assert_allclose(qp.d_ineq, [-1, 0, 8, 0, -4])
        assert_allclose(np.diag(qp.Q), [0, 0, 6, 4, 1])

    def test_objective_matches_soft_penalties(self, mixed_spec, rng):
        qp = to_qp(mixed_spec)
        for _ in range(20):
            x = rng.uniform(-10, 10, size=2)
            z = extend_for_qp(qp, mixed_spec, x)
            assert qp.objective(z) == pytest.approx(soft_objective(mixed_spec, x))
            assert_allclose(qp.A_eq[1:] @ z, qp.b_eq[1:])

    def test_feasibility_only(self, hard_only_spec):
        assert to_qp(hard_only_spec).is_feasibility_only


class TestToLp:

    def test_three_button_shape(self, three_button):
        lp = to_lp(three_button)
        assert lp.n == 9
        assert lp.m_eq == 4 and lp.m_ineq == 0
        assert list(lp.nonneg) == [False] * 3 + [True] * 6
        assert_allclose(lp.c, [0, 0, 0, 1, 1, 1, 1, 1, 1])

    def test_objective_matches_soft_penalties(self, mixed_spec, rng):
        lp = to_lp(mixed_spec)
        assert lp.split_map == {2: (2, None), 3: (3, None), 4: (4, 5)}
        for _ in range(20):
            x = rng.uniform(-10, 10, size=2)
            z = extend_for_lp(lp, mixed_spec, x)
            assert lp.objective(z) == pytest.approx(soft_objective(mixed_spec, x, power=1))
            assert np.all(z[2:] >= 0)

    def test_generated_layout_is_feasible_at_extension(self):
        spec = generate_layout(widgets=6, seed=3)
        lp = to_lp(spec)
        x = np.zeros(spec.var_count)
        x[:2] = [800, 600]
        x[2:] = 10.0
        z = extend_for_lp(lp, spec, x)
        soft_rows = [k for k, i in enumerate(lp.eq_origin) if i in lp.split_map]
        assert_allclose(lp.A_eq[soft_rows] @ z, lp.b_eq[soft_rows])


class TestFromArrays:

    def test_qp_fills_missing_blocks(self):
        qp = QpProblem.from_arrays([[2.0]])
        assert qp.n == 1 and qp.m_eq == 0 and qp.m_ineq == 0
        assert qp.A_eq.shape == (0, 1)

    def test_qp_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            QpProblem.from_arrays([[1.0, 2.0], [0.0, 1.0]])

    def test_lp_mask_shape(self):
        with pytest.raises(ValueError):
            LpProblem.from_arrays([1.0, 2.0], nonneg=[True])


class TestIndependentEqualities:

    def test_duplicate_row_is_dropped(self):
        spec = LayoutSpec(var_count=2, constraints=(
            Constraint(terms=((0, 1.0),), relation=Relation.EQ, rhs=5.0),
            Constraint(terms=((0, 1.0),), relation=Relation.EQ, rhs=5.0),
            Constraint(terms=((0, 1.0), (1, -1.0)), relation=Relation.EQ, rhs=0.0, penalty=1.0),
        ))
        qp = to_qp(spec)
        reduced = qp.with_independent_equalities()
        assert reduced.m_eq == 2
        assert reduced.eq_origin in ([0, 2], [1, 2])
        assert_allclose(reduced.b_eq, [5.0, 0.0])
        assert qp.m_eq == 3

    def test_independent_rows_return_the_same_problem(self, three_button):
        qp = to_qp(three_button)
        assert qp.with_independent_equalities() is qp

    def test_arrays_without_origin(self):
        qp = QpProblem.from_arrays(np.eye(2), A_eq=[[1.0, 1.0], [2.0, 2.0]], b_eq=[1.0, 2.0])
        reduced = qp.with_independent_equalities()
        assert reduced.m_eq == 1
        assert reduced.n == 2


def test_random_specs_keep_the_objective_identity(make_spec, rng):
    for _ in range(200):
        spec = make_spec()
        qp, lp = to_qp(spec), to_lp(spec)
        x = rng.uniform(-20.0, 20.0, size=spec.var_count)

        z = extend_for_qp(qp, spec, x)
        assert qp.objective(z) == pytest.approx(soft_objective(spec, x), rel=1e-9, abs=1e-9)
        soft_eq = [k for k, i in enumerate(qp.eq_origin) if i in qp.slack_map]
        assert_allclose(qp.A_eq[soft_eq] @ z, qp.b_eq[soft_eq], atol=1e-9)
        soft_ineq = [k for k, i in enumerate(qp.ineq_origin) if i == -1 or i in qp.slack_map]
        assert np.all(qp.C_ineq[soft_ineq] @ z <= qp.d_ineq[soft_ineq] + 1e-9)

        w = extend_for_lp(lp, spec, x)
        assert lp.objective(w) == pytest.approx(soft_objective(spec, x, power=1), rel=1e-9, abs=1e-9)
        assert np.all(w[spec.var_count:] >= 0.0)
        soft_eq = [k for k, i in enumerate(lp.eq_origin) if i in lp.split_map]
        assert_allclose(lp.A_eq[soft_eq] @ w, lp.b_eq[soft_eq], atol=1e-9)
