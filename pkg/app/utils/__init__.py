"""Path helpers resolving files against the project root."""
