"""Lowering of layout specs into QP and LP problems."""
