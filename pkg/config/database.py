"""
SQLite connection manager for the analysis run log.

Provides thread-local connections and startup helpers.
Uses WAL mode so the CLI and the HTTP service can share one database file.
"""

import logging
import os
import sqlite3
import threading

from config.settings import get_settings

logger = logging.getLogger("DB")

_local = threading.local()


def db_path() -> str:
    return get_settings().db_path


def get_connection() -> sqlite3.Connection:
    """Return a thread-local SQLite connection (reopened when the configured path changes)."""
    path = db_path()
    conn = getattr(_local, "conn", None)
    if conn is None or getattr(_local, "path", None) != path:
        if conn is not None:
            conn.close()
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        conn = sqlite3.connect(path)
        conn.row_factory = sqlite3.Row
        conn.execute("PRAGMA journal_mode=WAL")
        conn.execute("PRAGMA busy_timeout=5000")
        _local.conn = conn
        _local.path = path
    return conn


def close_connection():
    conn = getattr(_local, "conn", None)
    if conn is not None:
        conn.close()
    _local.conn = None
    _local.path = None


def init_db():
    """Create the run-log table if it does not exist."""
    conn = get_connection()
    conn.executescript("""
        CREATE TABLE IF NOT EXISTS analysis_runs (
            run_id              TEXT PRIMARY KEY,
            model_id            TEXT NOT NULL,
            direction           TEXT NOT NULL CHECK(direction IN ('max','min')),
            objective           TEXT NOT NULL CHECK(objective IN ('reward','reachability')),
            bound               TEXT NOT NULL,
            bound_kind          TEXT NOT NULL CHECK(bound_kind IN ('lower','upper')),
            threshold           TEXT,
            verdict             TEXT CHECK(verdict IS NULL OR verdict IN ('refuted','inconclusive')),
            explored_beliefs    INTEGER,
            cut_transitions     INTEGER,
            clip_transitions    INTEGER,
            eta                 INTEGER,
            wall_time_ms        INTEGER,
            report_json         TEXT NOT NULL,
            created_at          TIMESTAMP NOT NULL DEFAULT CURRENT_TIMESTAMP
        );

        CREATE INDEX IF NOT EXISTS idx_runs_model   ON analysis_runs(model_id);
        CREATE INDEX IF NOT EXISTS idx_runs_created ON analysis_runs(created_at);
    """)
    conn.commit()
    logger.info("SQLite run log initialised at %s", db_path())
