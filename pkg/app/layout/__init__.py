"""Layout model: constraints, spec files, builder and generator."""
