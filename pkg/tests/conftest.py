"""Shared fixtures: small layouts and random problem factories."""

import numpy as np
import pytest

from app.core.schemas import Constraint, LayoutSpec, Relation
from app.layout.builder import three_button_spec
from app.transform.lowering import LpProblem, QpProblem


@pytest.fixture
def three_button() -> LayoutSpec:
    return three_button_spec()


@pytest.fixture
def hard_only_spec() -> LayoutSpec:
    """0 <= x0 <= 10, x1 = x0 + 5, all hard."""
    return LayoutSpec(
        var_count=2,
        constraints=(
            Constraint(terms=((0, 1.0),), relation=Relation.GE, rhs=0.0),
            Constraint(terms=((0, 1.0),), relation=Relation.LE, rhs=10.0),
            Constraint(terms=((1, 1.0), (0, -1.0)), relation=Relation.EQ, rhs=5.0),
        ),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


def random_pd_qp(rng, max_n: int = 6, max_rows: int = 8) -> QpProblem:
    """Strictly feasible QP with a positive definite Hessian."""
    n = int(rng.integers(1, max_n + 1))
    M = rng.normal(size=(n, n))
    Q = M.T @ M + np.eye(n)
    g = rng.normal(scale=3.0, size=n)
    anchor = rng.normal(size=n)

    m = int(rng.integers(0, max_rows + 1))
    C = rng.normal(size=(m, n))
    d = C @ anchor + rng.uniform(0.1, 2.0, size=m)

    m_eq = int(rng.integers(0, min(2, n - 1) + 1)) if n > 1 else 0
    A = rng.normal(size=(m_eq, n))
    b = A @ anchor
    return QpProblem.from_arrays(Q, g, A, b, C, d)


def random_small_lp(rng, max_n: int = 4, max_rows: int = 5) -> LpProblem:
    """Small LP over nonnegative variables; may be infeasible or unbounded."""
    n = int(rng.integers(1, max_n + 1))
    c = rng.normal(size=n)
    m = int(rng.integers(1, max_rows + 1))
    C = rng.normal(size=(m, n))
    d = rng.normal(scale=2.0, size=m) + 1.0
    m_eq = int(rng.integers(0, min(2, n) + 1))
    A = rng.normal(size=(m_eq, n))
    b = A @ rng.uniform(0.0, 2.0, size=n)
    return LpProblem.from_arrays(c, A, b, C, d)


def random_spec(rng, max_vars: int = 5, max_constraints: int = 8) -> LayoutSpec:
    """Spec with every relation, hard and soft rows, fractional data and non-unit penalties."""
    n = int(rng.integers(1, max_vars + 1))
    constraints = []
    for _ in range(int(rng.integers(1, max_constraints + 1))):
        k = int(rng.integers(1, n + 1))
        idx = sorted(int(i) for i in rng.choice(n, size=k, replace=False))
        terms = tuple((i, float(rng.uniform(-5.0, 5.0))) for i in idx)
        relation = list(Relation)[int(rng.integers(0, 3))]
        penalty = None if rng.random() < 0.4 else float(rng.uniform(0.05, 20.0))
        constraints.append(Constraint(terms=terms, relation=relation,
                                      rhs=float(rng.normal(scale=50.0)), penalty=penalty))
    names = tuple(f"tab{i}" if rng.random() < 0.5 else f"x{i}" for i in range(n))
    return LayoutSpec(var_count=n, var_names=names, constraints=tuple(constraints))


@pytest.fixture
def make_qp(rng):
    return lambda **kwargs: random_pd_qp(rng, **kwargs)


@pytest.fixture
def make_lp(rng):
    return lambda **kwargs: random_small_lp(rng, **kwargs)


@pytest.fixture
def make_spec(rng):
    return lambda **kwargs: random_spec(rng, **kwargs)
