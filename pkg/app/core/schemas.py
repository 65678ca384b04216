"""Core data models and schemas for the layout solvers."""

import math
import re
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


_LABEL_RE = re.compile(r"^[^\s#]+$")


class Relation(str, Enum):
    """Relation between the left and right hand side of a constraint."""
    EQ = "EQ"
    LE = "LE"
    GE = "GE"


class SolveStatus(str, Enum):
    """Outcome of a solve."""
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"
    NUMERICAL_ERROR = "numerical_error"
    ERROR = "error"


class Strategy(str, Enum):
    """Solving strategy, keyed by its CLI name."""
    INTERIOR_POINT = "ip"
    ACTIVE_SET = "as"
    SIMPLEX = "simplex"

    @property
    def label(self) -> str:
        return {
            Strategy.INTERIOR_POINT: "InteriorPoint",
            Strategy.ACTIVE_SET: "ActiveSet",
            Strategy.SIMPLEX: "Simplex",
        }[self]

    @property
    def is_quadratic(self) -> bool:
        return self is not Strategy.SIMPLEX


class Constraint(BaseModel):
    """Linear layout constraint `sum(coeff * x[idx]) <relation> rhs`.

    Hard constraints have no penalty; soft constraints carry a positive one.
    """

    model_config = ConfigDict(frozen=True)

    terms: Tuple[Tuple[int, float], ...]
    relation: Relation
    rhs: float
    penalty: Optional[float] = Field(None, description="None for hard constraints")

    @field_validator("terms")
    @classmethod
    def _check_terms(cls, terms):
        if not terms:
            raise ValueError("constraint needs at least one term")
        seen = set()
        for idx, coeff in terms:
            if idx < 0:
                raise ValueError(f"negative variable index {idx}")
            if idx in seen:
                raise ValueError(f"duplicate variable index {idx}")
            if not math.isfinite(coeff):
                raise ValueError(f"non-finite coefficient for x{idx}")
            seen.add(idx)
        return terms

    @field_validator("rhs")
    @classmethod
    def _check_rhs(cls, rhs):
        if not math.isfinite(rhs):
            raise ValueError("non-finite right hand side")
        return rhs

    @field_validator("penalty")
    @classmethod
    def _check_penalty(cls, penalty):
        if penalty is not None and not (math.isfinite(penalty) and penalty > 0):
            raise ValueError(f"soft penalty must be positive, got {penalty}")
        return penalty

    @property
    def is_hard(self) -> bool:
        return self.penalty is None

    @property
    def is_soft(self) -> bool:
        return self.penalty is not None

    def lhs(self, x) -> float:
        """Evaluate the left hand side at `x`."""
        return float(sum(coeff * x[idx] for idx, coeff in self.terms))

    def normalized(self) -> Tuple[Tuple[Tuple[int, float], ...], Relation, float]:
        """Return (terms, relation, rhs) with GE rewritten as LE."""
        if self.relation is Relation.GE:
            return tuple((i, -c) for i, c in self.terms), Relation.LE, -self.rhs
        return self.terms, self.relation, self.rhs


class LayoutSpec(BaseModel):
    """Tab-stop variables plus the hard and soft constraints over them."""

    model_config = ConfigDict(frozen=True)

    var_count: int = Field(ge=1)
    var_names: Tuple[str, ...] = ()
    constraints: Tuple[Constraint, ...]

    @model_validator(mode="before")
    @classmethod
    def _default_names(cls, data: Any):
        if isinstance(data, dict) and not data.get("var_names"):
            count = data.get("var_count") or 0
            data = {**data, "var_names": tuple(f"x{i}" for i in range(int(count)))}
        return data

    @model_validator(mode="after")
    def _check_consistency(self):
        if len(self.var_names) != self.var_count:
            raise ValueError(
                f"{len(self.var_names)} names given for {self.var_count} variables"
            )
        for name in self.var_names:
            if not _LABEL_RE.match(name):
                raise ValueError(f"invalid variable label {name!r}")
        if not self.constraints:
            raise ValueError("layout spec needs at least one constraint")
        for i, constraint in enumerate(self.constraints):
            for idx, _ in constraint.terms:
                if idx >= self.var_count:
                    raise ValueError(
                        f"constraint {i} references x{idx} but only {self.var_count} variables exist"
                    )
        return self

    @property
    def hard_indices(self) -> List[int]:
        return [i for i, c in enumerate(self.constraints) if c.is_hard]

    @property
    def soft_indices(self) -> List[int]:
        return [i for i, c in enumerate(self.constraints) if c.is_soft]


class Solution(BaseModel):
    """Layout-level solve result: variable values and per-constraint errors."""
    x: List[float]
    status: SolveStatus
    iterations: int = Field(default=0, ge=0)
    errors: List[float]
    objective: Optional[float] = None
    strategy: Optional[Strategy] = None
    message: Optional[str] = None


class OptimizationResult(BaseModel):
    """Problem-level result returned by the QP and LP backends."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    x: np.ndarray
    status: SolveStatus
    iterations: int = 0
    objective: float = math.nan
    message: Optional[str] = None
    stats: Dict[str, Any] = Field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status is SolveStatus.OPTIMAL


class BarrierParams(BaseModel):
    """Parameters of the barrier interior point method."""
    mu: float = Field(default=10.0, gt=1.0, description="Outer multiplier for t")
    eps: float = Field(default=1e-6, gt=0.0, description="Stop once m/t < eps")
    t0: float = Field(default=1.0, gt=0.0, description="Initial barrier weight")
    newton_tol: float = Field(default=1e-10, gt=0.0)
    max_outer: int = Field(default=64, ge=1)
    max_inner: int = Field(default=100, ge=1)


class GenConfig(BaseModel):
    """Size range and seeding of a generated layout suite."""
    min_size: int = 4
    max_size: int = 2400
    step: int = 4
    per_size: int = Field(default=10, ge=1)
    seed: int = 42
    window: Tuple[int, int] = (800, 600)

    @model_validator(mode="after")
    def _check_sizes(self):
        if self.min_size < 4 or self.min_size % 4:
            raise ValueError(f"min_size must be a multiple of 4 and >= 4, got {self.min_size}")
        if self.step <= 0 or self.step % 4:
            raise ValueError(f"step must be a positive multiple of 4, got {self.step}")
        if self.max_size < self.min_size:
            raise ValueError("max_size must not be below min_size")
        if self.window[0] <= 0 or self.window[1] <= 0:
            raise ValueError("window dimensions must be positive")
        return self

    def sizes(self) -> List[int]:
        return list(range(self.min_size, self.max_size + 1, self.step))


class SuiteEntry(BaseModel):
    """One planned layout of a suite: its constraint count, index and seed."""
    size: int
    index: int
    seed: int

    @property
    def widgets(self) -> int:
        return self.size // 4

    @property
    def file_name(self) -> str:
        return f"layout_c{self.size}_i{self.index}.spec"


class GeneratedLayout(BaseModel):
    """A generated spec together with the suite entry it was built from."""
    entry: SuiteEntry
    spec: LayoutSpec


class BenchRecord(BaseModel):
    """One cell of the benchmark: a strategy solving one spec."""
    strategy: Strategy
    constraints: int = Field(ge=0)
    run: int = Field(ge=0)
    time_ms: float = Field(ge=0.0)
    suboptimal: int = Field(default=0, ge=0)
    iterations: int = Field(default=0, ge=0)
    status: SolveStatus


class RegressionFit(BaseModel):
    """Least-squares fit of a timing model T(c)."""
    model: str = "cubic"
    beta: Tuple[float, ...]
    r_squared: float
    n_points: int = 0
    strategy: Optional[Strategy] = None
