"""Core module: schemas and error types."""
