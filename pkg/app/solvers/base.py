"""Base class and interface for layout solving strategies."""

from abc import ABC, abstractmethod
from typing import Union

from app.core.schemas import LayoutSpec, OptimizationResult, Solution, Strategy
from app.layout.model import build_solution
from app.transform.lowering import LpProblem, QpProblem

Problem = Union[QpProblem, LpProblem]


class LayoutSolver(ABC):
    """Abstract base class for solving strategies.

    A strategy lowers a spec into its problem form and solves that problem.
    The two halves are separate so the benchmark can time the solve alone.
    """

    strategy: Strategy

    def __init__(self, **options):
        self.options = options

    @abstractmethod
    def lower(self, spec: LayoutSpec) -> Problem:
        """Transform a spec into the problem this strategy solves."""
        pass

    @abstractmethod
    def solve_problem(self, problem: Problem) -> OptimizationResult:
        """Solve an already lowered problem."""
        pass

    def solve(self, spec: LayoutSpec) -> Solution:
        """Lower, solve and measure the per-constraint errors of `spec`."""
        result = self.solve_problem(self.lower(spec))
        return build_solution(spec, result, self.strategy)

    def get_strategy_name(self) -> str:
        return self.strategy.label
