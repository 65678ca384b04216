"""Constraint solvers for UI layout: interior point, active set and simplex."""

__version__ = "0.1.0"
