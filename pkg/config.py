import logging
import os
from dotenv import load_dotenv

from errors import ConfigError

# Load environment variables from .env file
load_dotenv()


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a number, got {raw!r}")


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}")


# Logging
LOG_LEVEL = os.getenv("BARRON_LOG_LEVEL", "INFO")

# Parallel (N, seed) cells in rate sweeps
WORKERS = _env_int("BARRON_WORKERS", 1)

# Where the CLI writes artifacts when --out is not given
OUTPUT_DIR = os.getenv("BARRON_OUTPUT_DIR", "out")

# Truncation tolerances, relative to the integral being truncated
FREQ_TAIL_TOL = _env_float("BARRON_FREQ_TAIL_TOL", 1e-10)
SPATIAL_TAIL_TOL = _env_float("BARRON_SPATIAL_TAIL_TOL", 1e-10)

# A_p statistic above this value counts as diverging
AP_CAP = _env_float("BARRON_AP_CAP", 1e6)

# Points in the tabulated inverse CDFs of the frequency sampler
TABLE_SIZE = _env_int("BARRON_TABLE_SIZE", 10_000)

# Half-width of the unit-panel core of full-space grids
CORE_RADIUS = _env_float("BARRON_CORE_RADIUS", 8.0)

# Runtime configuration (set by the CLI for one invocation, never persisted)
_runtime_config = {
    "workers": WORKERS,
    "log_level": LOG_LEVEL,
}


def get_workers() -> int:
    """Get the current worker count (runtime or env)."""
    return max(1, int(_runtime_config.get("workers") or WORKERS))


def set_workers(workers: int):
    """Set the worker count for this process."""
    if workers < 1:
        raise ConfigError(f"workers must be positive, got {workers}")
    _runtime_config["workers"] = workers


def get_log_level() -> str:
    """Get the current log level (runtime or env)."""
    return _runtime_config.get("log_level") or LOG_LEVEL


def set_log_level(level: str):
    _runtime_config["log_level"] = level
    configure_logging(level)


def configure_logging(level: str = None):
    """Configure the root logger once; later calls only change the level."""
    level = (level or get_log_level()).upper()
    if not isinstance(logging.getLevelName(level), int):
        raise ConfigError(f"unknown log level {level!r}")
    root = logging.getLogger()
    if not root.handlers:
        logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    root.setLevel(level)
