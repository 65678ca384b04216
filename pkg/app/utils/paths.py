"""Utility functions for portable path handling."""

import sys
from pathlib import Path
from typing import Union


def get_base_path() -> Path:
    """
    Get the base path for the project.

    When running as a frozen executable, returns the directory containing it.
    Otherwise walks up from the working directory looking for the project root
    (a directory holding the `app` package or `.env.example`).

    Returns:
        Path object pointing to the base directory
    """
    if getattr(sys, 'frozen', False):
        return Path(sys.executable).parent

    cwd = Path.cwd()
    current = cwd
    for _ in range(5):  # Max 5 levels up
        if (current / "app").is_dir() or (current / ".env.example").exists():
            return current
        parent = current.parent
        if parent == current:  # Reached filesystem root
            break
        current = parent
    return cwd


def resolve_path(path: Union[str, Path]) -> Path:
    """Resolve a relative path against the base path; absolute paths pass through."""
    path = Path(path)
    if path.is_absolute():
        return path
    return get_base_path() / path
