"""
Runtime settings read from environment variables, plus logging setup.

    BELIEF_BOUND_THREADS          worker threads for clipping solves (default 1)
    BELIEF_BOUND_DB               SQLite run-log path
    BELIEF_BOUND_LOG_LEVEL        root log level (default WARNING)
    BELIEF_BOUND_EXACT_LIMIT      largest chain solved with exact rationals
    BELIEF_BOUND_ORACLE_HORIZON   largest horizon for the n-step oracles
    BELIEF_BOUND_MAX_ITERATIONS   value-iteration cap
"""

import logging
import os
import sys
from dataclasses import dataclass
from functools import lru_cache

from model.errors import ConfigurationError

LOG_FORMAT = "[%(name)s] %(levelname)s %(message)s"


def _int_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigurationError(f"{name} must be an integer, got {raw!r}") from None
    if value < minimum:
        raise ConfigurationError(f"{name} must be >= {minimum}, got {value}")
    return value


@dataclass(frozen=True)
class Settings:
    threads: int
    db_path: str
    log_level: str
    exact_limit: int
    oracle_horizon: int
    max_iterations: int


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Read settings once; call get_settings.cache_clear() after changing the environment."""
    return Settings(
        threads=_int_env("BELIEF_BOUND_THREADS", 1),
        db_path=os.environ.get("BELIEF_BOUND_DB", os.path.join("data", "belief_bound.db")),
        log_level=os.environ.get("BELIEF_BOUND_LOG_LEVEL", "WARNING").upper(),
        exact_limit=_int_env("BELIEF_BOUND_EXACT_LIMIT", 10_000),
        oracle_horizon=_int_env("BELIEF_BOUND_ORACLE_HORIZON", 8, minimum=0),
        max_iterations=_int_env("BELIEF_BOUND_MAX_ITERATIONS", 1_000_000),
    )


def configure_logging(level=None):
    """Send log records to stderr with bracketed component tags; stdout stays clean for reports."""
    if level is None:
        level = get_settings().log_level
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_belief_bound", False):
            root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._belief_bound = True
    root.addHandler(handler)
    root.setLevel(level)
