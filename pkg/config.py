"""Configuration management with environment variable validation."""
import logging
import os
import sys

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)


def _int_env(name: str, default: int) -> int:
    """Read an int setting, treating an empty value as unset.

    os.getenv's default only applies when the variable is absent, but a
    .env file may carry a key with a blank value to mean "use the default".
    """
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning("%s=%r is not an integer; using default %s", name, raw, default)
        return default


def _float_env(name: str, default: float) -> float:
    """Read a float setting with the same blank/garbage handling as _int_env."""
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        return float(raw)
    except ValueError:
        logger.warning("%s=%r is not a number; using default %s", name, raw, default)
        return default


class Config:
    """Centralized configuration with validation."""

    # Output directory for reports, tables and plots (overridden by --out-dir)
    SPIKEGOF_OUT_DIR = os.getenv("SPIKEGOF_OUT_DIR", "").strip() or "out"

    # Quadrature of the conditional intensity over one inter-event segment
    QUAD_TOL = _float_env("QUAD_TOL", 1e-8)
    QUAD_MAX_EVAL = _int_env("QUAD_MAX_EVAL", 10000)

    # Integration step of the first-passage solver
    BOUNDARY_STEP = _float_env("BOUNDARY_STEP", 0.001)

    # Test battery
    DEFAULT_LEVEL = _float_env("DEFAULT_LEVEL", 0.05)
    N_PERMUTATIONS = _int_env("N_PERMUTATIONS", 1000)

    # Thinning: dominating bound = safety * max(lambda on grid) + hazard asymptote
    THINNING_SAFETY = _float_env("THINNING_SAFETY", 1.2)
    THINNING_GRID = _int_env("THINNING_GRID", 64)

    # Monte Carlo
    THREADS = _int_env("THREADS", 0)  # 0 = machine parallelism
    DEFAULT_SEED = _int_env("DEFAULT_SEED", 20080101)

    # Logging
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

    VERSION = "1.0.0"

    @classmethod
    def validate(cls):
        """Validate numeric settings; every problem is logged before exiting."""
        errors = []

        if not 0 < cls.QUAD_TOL < 1:
            errors.append("QUAD_TOL must be in (0, 1)")

        if not 0 < cls.BOUNDARY_STEP <= 0.01:
            errors.append("BOUNDARY_STEP must be in (0, 0.01]")

        if not 0 < cls.DEFAULT_LEVEL < 0.5:
            errors.append("DEFAULT_LEVEL must be in (0, 0.5)")

        if cls.THINNING_SAFETY < 1:
            errors.append("THINNING_SAFETY must be at least 1")

        for name in ("QUAD_MAX_EVAL", "THINNING_GRID"):
            if getattr(cls, name) <= 0:
                errors.append(f"{name} must be positive")

        if cls.N_PERMUTATIONS < 100:
            errors.append("N_PERMUTATIONS must be at least 100")

        if cls.THREADS < 0:
            errors.append("THREADS must be 0 (machine parallelism) or positive")

        if cls.LOG_LEVEL.upper() not in getattr(logging, "getLevelNamesMapping", logging._nameToLevel.copy)():
            errors.append(f"LOG_LEVEL {cls.LOG_LEVEL!r} is not a logging level")

        if errors:
            logger.error("Configuration validation failed:")
            for error in errors:
                logger.error(f"  - {error}")
            sys.exit(2)

        logger.debug("Configuration validated successfully")


# Create singleton instance
config = Config()
