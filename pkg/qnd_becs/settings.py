# settings.py
import os

from dotenv import load_dotenv

from .numerics.common import ConfigurationError

# Read a local .env when present; real environment variables win
load_dotenv()

# Worker processes used by parameter sweeps, parsed on use
WORKERS_VARIABLE = "QND_BECS_WORKERS"

# Root logging level for the command line
LOG_LEVEL = os.getenv("QND_BECS_LOG_LEVEL", "INFO")

# Default output directory for presets run without --out
OUTPUT_DIR = os.getenv("QND_BECS_OUTPUT_DIR", "results")


def worker_count(override=None) -> int:
    """
    Worker count from an explicit override or the environment.

    Raises:
        ConfigurationError: if QND_BECS_WORKERS is not an integer
    """
    if override is not None:
        return max(1, int(override))
    raw = os.getenv(WORKERS_VARIABLE, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigurationError(f"{WORKERS_VARIABLE} must be an integer, got {raw!r}")
