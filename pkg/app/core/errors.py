"""Exception hierarchy shared by the solvers, the spec reader and the benchmark."""

from typing import Optional


class LayoutSolverError(Exception):
    """Base class for all errors raised by the layout solving toolkit."""


class SingularMatrixError(LayoutSolverError):
    """A linear system could not be factorized (pivot below threshold)."""


class NonFiniteError(LayoutSolverError):
    """A NaN or infinite value reached a vector or matrix operation."""


class InfeasibleError(LayoutSolverError):
    """The hard constraints admit no (strictly) feasible point."""


class UnboundedError(LayoutSolverError):
    """The objective decreases without bound on the feasible region."""


class IterationLimitError(LayoutSolverError):
    """An iterative method ran out of its iteration budget."""

    def __init__(self, message: str, iterations: int = 0):
        super().__init__(message)
        self.iterations = iterations


class DegenerateFitError(LayoutSolverError):
    """Not enough distinct abscissae to fit the requested model."""


class ParseError(LayoutSolverError):
    """A layout spec file could not be parsed."""

    def __init__(self, message: str, line_no: Optional[int] = None):
        self.line_no = line_no
        self.reason = message
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
