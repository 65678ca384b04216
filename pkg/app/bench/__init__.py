"""Benchmark harness, regression fits and correctness oracles."""
