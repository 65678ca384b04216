"""Lowering of a LayoutSpec into the QP and LP problems consumed by the solvers.

Soft constraints get one slack column each. The QP squares the slacks and
weights them by the penalties; the LP weights them linearly, splitting the
free slack of a soft equality into a nonnegative pair.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.core.schemas import LayoutSpec, Relation
from app.linalg.dense import as_matrix, as_vector, is_symmetric, row_basis

logger = logging.getLogger(__name__)


class QpProblem(BaseModel):
    """min 1/2 x^T Q x - g^T x  s.t.  A_eq x = b_eq,  C_ineq x <= d_ineq."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int
    Q: np.ndarray
    g: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    C_ineq: np.ndarray
    d_ineq: np.ndarray
    var_count: int = Field(description="Leading columns that are layout variables")
    slack_map: Dict[int, int] = Field(default_factory=dict)
    eq_origin: List[int] = Field(default_factory=list)
    ineq_origin: List[int] = Field(default_factory=list, description="-1 marks slack sign rows")

    @property
    def m_eq(self) -> int:
        return self.A_eq.shape[0]

    @property
    def m_ineq(self) -> int:
        return self.C_ineq.shape[0]

    @property
    def is_feasibility_only(self) -> bool:
        """True when the objective is constant (no penalized slacks, no linear term)."""
        return not np.any(self.Q) and not np.any(self.g)

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.Q @ x - self.g @ x)

    def gradient(self, x) -> np.ndarray:
        return self.Q @ np.asarray(x, dtype=float) - self.g

    def with_independent_equalities(self) -> "QpProblem":
        """Copy keeping only a linearly independent subset of the equality rows.

        Only valid once the rows are known to be consistent; dependent rows
        then carry no information.
        """
        if self.m_eq == 0:
            return self
        keep = row_basis(self.A_eq)
        if len(keep) == self.m_eq:
            return self
        logger.debug(f"Dropping {self.m_eq - len(keep)} dependent equality rows")
        origin = [self.eq_origin[i] for i in keep] if len(self.eq_origin) == self.m_eq else []
        return self.model_copy(update={
            "A_eq": self.A_eq[keep], "b_eq": self.b_eq[keep], "eq_origin": origin,
        })

    @classmethod
    def from_arrays(cls, Q, g=None, A_eq=None, b_eq=None, C_ineq=None, d_ineq=None) -> "QpProblem":
        """Build a general QP; missing blocks become empty."""
        Q = as_matrix(Q, name="Q")
        n = Q.shape[0]
        if Q.shape != (n, n) or not is_symmetric(Q):
            raise ValueError("Q must be a symmetric square matrix")
        g = np.zeros(n) if g is None else as_vector(g, length=n, name="g")
        A_eq = as_matrix([] if A_eq is None else A_eq, cols=n, name="A_eq")
        b_eq = as_vector([] if b_eq is None else b_eq, length=A_eq.shape[0], name="b_eq")
        C_ineq = as_matrix([] if C_ineq is None else C_ineq, cols=n, name="C_ineq")
        d_ineq = as_vector([] if d_ineq is None else d_ineq, length=C_ineq.shape[0], name="d_ineq")
        return cls(
            n=n, Q=Q, g=g, A_eq=A_eq, b_eq=b_eq, C_ineq=C_ineq, d_ineq=d_ineq, var_count=n,
            eq_origin=[-1] * A_eq.shape[0], ineq_origin=[-1] * C_ineq.shape[0],
        )


class LpProblem(BaseModel):
    """min c^T x  s.t.  A_eq x = b_eq,  C_ineq x <= d_ineq,  x_j >= 0 where nonneg[j]."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    c: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    C_ineq: np.ndarray
    d_ineq: np.ndarray
    nonneg: np.ndarray
    var_count: int
    split_map: Dict[int, Tuple[int, Optional[int]]] = Field(
        default_factory=dict,
        description="constraint index -> (s_plus, s_minus) columns; s_minus is None for soft LE",
    )
    eq_origin: List[int] = Field(default_factory=list)
    ineq_origin: List[int] = Field(default_factory=list)

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def m_eq(self) -> int:
        return self.A_eq.shape[0]

    @property
    def m_ineq(self) -> int:
        return self.C_ineq.shape[0]

    def objective(self, x) -> float:
        return float(self.c @ np.asarray(x, dtype=float))

    @classmethod
    def from_arrays(cls, c, A_eq=None, b_eq=None, C_ineq=None, d_ineq=None, nonneg=None) -> "LpProblem":
        """Build a general LP; variables are nonnegative unless `nonneg` says otherwise."""
        c = as_vector(c, name="c")
        n = c.shape[0]
        A_eq = as_matrix([] if A_eq is None else A_eq, cols=n, name="A_eq")
        b_eq = as_vector([] if b_eq is None else b_eq, length=A_eq.shape[0], name="b_eq")
        C_ineq = as_matrix([] if C_ineq is None else C_ineq, cols=n, name="C_ineq")
        d_ineq = as_vector([] if d_ineq is None else d_ineq, length=C_ineq.shape[0], name="d_ineq")
        mask = np.ones(n, dtype=bool) if nonneg is None else np.asarray(nonneg, dtype=bool)
        if mask.shape != (n,):
            raise ValueError(f"nonneg mask has shape {mask.shape}, expected ({n},)")
        return cls(
            c=c, A_eq=A_eq, b_eq=b_eq, C_ineq=C_ineq, d_ineq=d_ineq, nonneg=mask, var_count=n,
            eq_origin=[-1] * A_eq.shape[0], ineq_origin=[-1] * C_ineq.shape[0],
        )


def _row(terms, width: int) -> np.ndarray:
    row = np.zeros(width)
    for idx, coeff in terms:
        row[idx] += coeff
    return row


def _stack(rows: List[np.ndarray], width: int) -> np.ndarray:
    return np.vstack(rows) if rows else np.zeros((0, width))


def to_qp(spec: LayoutSpec) -> QpProblem:
    """
    Lower a spec into a QP with squared, penalty-weighted slacks.

    Hard rows are copied (GE normalized to LE). A soft EQ becomes
    a^T x + s = b with a free slack; a soft LE becomes a^T x - s <= b plus
    -s <= 0. Q carries 2 * penalty on each slack diagonal entry, g = 0.
    """
    soft = spec.soft_indices
    n = spec.var_count + len(soft)
    q_diag = np.zeros(n)
    slack_map: Dict[int, int] = {}

    eq_rows, eq_rhs, eq_origin = [], [], []
    ineq_rows, ineq_rhs, ineq_origin = [], [], []
    next_col = spec.var_count

    for i, constraint in enumerate(spec.constraints):
        terms, relation, rhs = constraint.normalized()
        row = _row(terms, n)
        if constraint.is_soft:
            col = next_col
            next_col += 1
            slack_map[i] = col
            q_diag[col] = 2.0 * constraint.penalty
            if relation is Relation.EQ:
                row[col] = 1.0
            else:
                row[col] = -1.0
                sign_row = np.zeros(n)
                sign_row[col] = -1.0
                ineq_rows.append(sign_row)
                ineq_rhs.append(0.0)
                ineq_origin.append(-1)
        if relation is Relation.EQ:
            eq_rows.append(row)
            eq_rhs.append(rhs)
            eq_origin.append(i)
        else:
            ineq_rows.append(row)
            ineq_rhs.append(rhs)
            ineq_origin.append(i)

    qp = QpProblem(
        n=n,
        Q=np.diag(q_diag),
        g=np.zeros(n),
        A_eq=_stack(eq_rows, n),
        b_eq=np.asarray(eq_rhs, dtype=float),
        C_ineq=_stack(ineq_rows, n),
        d_ineq=np.asarray(ineq_rhs, dtype=float),
        var_count=spec.var_count,
        slack_map=slack_map,
        eq_origin=eq_origin,
        ineq_origin=ineq_origin,
    )
    logger.debug(f"Lowered spec to QP: n={n}, m_eq={qp.m_eq}, m_ineq={qp.m_ineq}")
    return qp


def to_lp(spec: LayoutSpec) -> LpProblem:
    """
    Lower a spec into an LP with linearly weighted slacks.

    A soft EQ becomes a^T x + s+ - s- = b with cost penalty * (s+ + s-);
    a soft LE becomes a^T x - s <= b with cost penalty * s. Slacks are
    nonnegative, layout variables stay free.
    """
    columns = spec.var_count
    split_map: Dict[int, Tuple[int, Optional[int]]] = {}
    for i, constraint in enumerate(spec.constraints):
        if constraint.is_soft:
            _, relation, _ = constraint.normalized()
            if relation is Relation.EQ:
                split_map[i] = (columns, columns + 1)
                columns += 2
            else:
                split_map[i] = (columns, None)
                columns += 1

    cost = np.zeros(columns)
    nonneg = np.zeros(columns, dtype=bool)
    nonneg[spec.var_count:] = True

    eq_rows, eq_rhs, eq_origin = [], [], []
    ineq_rows, ineq_rhs, ineq_origin = [], [], []
    for i, constraint in enumerate(spec.constraints):
        terms, relation, rhs = constraint.normalized()
        row = _row(terms, columns)
        if i in split_map:
            plus, minus = split_map[i]
            cost[plus] = constraint.penalty
            if minus is None:
                row[plus] = -1.0
            else:
                cost[minus] = constraint.penalty
                row[plus] = 1.0
                row[minus] = -1.0
        if relation is Relation.EQ:
            eq_rows.append(row)
            eq_rhs.append(rhs)
            eq_origin.append(i)
        else:
            ineq_rows.append(row)
            ineq_rhs.append(rhs)
            ineq_origin.append(i)

    return LpProblem(
        c=cost,
        A_eq=_stack(eq_rows, columns),
        b_eq=np.asarray(eq_rhs, dtype=float),
        C_ineq=_stack(ineq_rows, columns),
        d_ineq=np.asarray(ineq_rhs, dtype=float),
        nonneg=nonneg,
        var_count=spec.var_count,
        split_map=split_map,
        eq_origin=eq_origin,
        ineq_origin=ineq_origin,
    )


def extend_for_qp(qp: QpProblem, spec: LayoutSpec, x: Sequence[float]) -> np.ndarray:
    """Append the exact slack values for layout point `x` to get a full QP vector."""
    z = np.zeros(qp.n)
    z[:spec.var_count] = np.asarray(x, dtype=float)[:spec.var_count]
    for i, col in qp.slack_map.items():
        terms, relation, rhs = spec.constraints[i].normalized()
        lhs = sum(coeff * z[idx] for idx, coeff in terms)
        z[col] = rhs - lhs if relation is Relation.EQ else max(0.0, lhs - rhs)
    return z


def extend_for_lp(lp: LpProblem, spec: LayoutSpec, x: Sequence[float]) -> np.ndarray:
    """Append the exact split slack values for layout point `x` to get a full LP vector."""
    z = np.zeros(lp.n)
    z[:spec.var_count] = np.asarray(x, dtype=float)[:spec.var_count]
    for i, (plus, minus) in lp.split_map.items():
        terms, relation, rhs = spec.constraints[i].normalized()
        lhs = sum(coeff * z[idx] for idx, coeff in terms)
        if minus is None:
            z[plus] = max(0.0, lhs - rhs)
        else:
            z[plus] = max(0.0, rhs - lhs)
            z[minus] = max(0.0, lhs - rhs)
    return z
