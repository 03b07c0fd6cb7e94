"""
Environment-backed settings for aggmem.

Precedence everywhere is: explicit argument (CLI flag) > environment > default.
"""
import os
from typing import Optional, Tuple
from dotenv import load_dotenv

load_dotenv()

DEFAULT_SEED = 20240101
DEFAULT_DATABASE_URL = "sqlite:///aggmem_runs.db"
DEFAULT_LOG_LEVEL = "WARNING"

SEED_ENV = "AGGMEM_SEED"
DATABASE_URL_ENV = "AGGMEM_DATABASE_URL"
WORKERS_ENV = "AGGMEM_WORKERS"
LOG_LEVEL_ENV = "AGGMEM_LOG_LEVEL"


def resolve_seed(seed: Optional[int] = None) -> Tuple[int, str]:
    """
    Resolve the global seed and report where it came from.

    Returns (seed, source) with source in {"cli", "env", "default"}.
    """
    if seed is not None:
        return int(seed), "cli"

    env_value = os.getenv(SEED_ENV)
    if env_value and env_value.strip():
        try:
            return int(env_value.strip()), "env"
        except ValueError:
            raise ValueError(f"{SEED_ENV} must be an integer, got {env_value!r}")

    return DEFAULT_SEED, "default"


def get_database_url() -> str:
    """Get run-ledger database URL from environment variables"""
    url = os.getenv(DATABASE_URL_ENV) or DEFAULT_DATABASE_URL

    # Heroku-style postgres:// URLs are not accepted by SQLAlchemy 2
    if url.startswith("postgres://"):
        url = url.replace("postgres://", "postgresql://", 1)

    return url


def get_worker_count(workers: Optional[int] = None) -> int:
    """Thread count for panel simulation; output never depends on it"""
    if workers is not None:
        return max(1, int(workers))
    env_value = os.getenv(WORKERS_ENV)
    if env_value and env_value.strip():
        return max(1, int(env_value.strip()))
    return 1


def get_log_level(level: Optional[str] = None) -> str:
    """Logging level name for the CLI"""
    return (level or os.getenv(LOG_LEVEL_ENV) or DEFAULT_LOG_LEVEL).upper()
