"""Solving strategies: barrier interior point, active set, two-phase simplex."""
