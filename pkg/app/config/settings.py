"""Application settings and configuration management."""

import os
import logging
from pathlib import Path
from typing import Optional, Tuple
from pydantic import BaseModel, ConfigDict, ValidationError
from dotenv import load_dotenv

from app.core.schemas import BarrierParams
from app.utils.paths import get_base_path

logger = logging.getLogger(__name__)


class Settings(BaseModel):
    """Solver, benchmark and logging defaults, overridable from the environment."""

    model_config = ConfigDict(validate_assignment=True)

    # Barrier interior point
    barrier_mu: float = 10.0
    barrier_eps: float = 1e-6
    barrier_t0: float = 1.0
    barrier_newton_tol: float = 1e-10
    barrier_max_outer: int = 64
    barrier_max_inner: int = 100

    # Active set (0 = scale with problem size)
    active_set_max_iter: int = 0

    # Simplex (0 = scale with problem size)
    simplex_max_iter: int = 0

    # Benchmark
    bench_tol: float = 1e-3
    bench_repeats: int = 3
    bench_warmup_runs: int = 2

    # Layout generator
    generator_seed: int = 42
    window_width: int = 800
    window_height: int = 600

    # Output
    output_dir: str = "output"

    # Logging
    log_level: str = "INFO"
    log_file: str = "logs/app.log"
    log_rotation_max_bytes: int = 10485760
    log_rotation_backup_count: int = 5

    def barrier_params(self, **overrides) -> BarrierParams:
        """Barrier parameters from settings, with optional per-call overrides."""
        values = {
            "mu": self.barrier_mu,
            "eps": self.barrier_eps,
            "t0": self.barrier_t0,
            "newton_tol": self.barrier_newton_tol,
            "max_outer": self.barrier_max_outer,
            "max_inner": self.barrier_max_inner,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return BarrierParams(**values)

    @property
    def window(self) -> Tuple[int, int]:
        return (self.window_width, self.window_height)


def load_settings(env_path: Optional[Path] = None) -> Settings:
    """Load settings from .env file and environment variables."""
    base_path = get_base_path()
    env_path = env_path or base_path / ".env"

    if env_path.exists():
        load_dotenv(env_path)
        logger.info(f"Loaded .env from: {env_path}")
    else:
        logger.debug(f".env file not found at: {env_path}, using defaults and environment")

    settings = Settings()

    # Environment variables named after fields (case-insensitive) override defaults
    for key, value in os.environ.items():
        key_lower = key.lower()
        if key_lower not in Settings.model_fields:
            continue
        try:
            setattr(settings, key_lower, value)
        except ValidationError:
            logger.warning(f"Ignoring invalid value for {key}: {value!r}")

    # Make log file path relative to base path
    if settings.log_file and not Path(settings.log_file).is_absolute():
        settings.log_file = str(base_path / settings.log_file)

    return settings
