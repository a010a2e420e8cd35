# Copyright (c) 2026 BroadcastElect contributors. Licensed under MIT.
"""Optional SQLite store for experiment runs.

Activated only when the NETSIM_DB_PATH environment variable is set.
Usage:
    export NETSIM_DB_PATH=/path/to/runs.db
"""

import json
import os
import sqlite3
import sys

_SCHEMA_SQL = """
CREATE TABLE IF NOT EXISTS runs (
    id                      INTEGER PRIMARY KEY AUTOINCREMENT,
    created_at              TEXT NOT NULL DEFAULT (datetime('now')),

    -- Configuration
    config_json             TEXT NOT NULL,
    x                       REAL NOT NULL,
    delay                   TEXT NOT NULL,

    -- Topology
    base_shape              TEXT NOT NULL,
    n                       INTEGER NOT NULL,
    connectivity            REAL NOT NULL,
    replication             INTEGER NOT NULL,
    seed                    INTEGER NOT NULL,
    edges                   INTEGER,

    -- Outcome
    leader                  INTEGER NOT NULL,
    leader_is_max_id        INTEGER NOT NULL,
    init_time               REAL,
    time_excl_init          REAL,
    completion_time         REAL,
    transmissions           INTEGER,
    post_init_transmissions INTEGER,
    work_phases             INTEGER
);

CREATE INDEX IF NOT EXISTS idx_runs_config ON runs(base_shape, n, connectivity);
"""

_COLUMNS = [
    'base_shape', 'n', 'connectivity', 'replication', 'seed', 'edges', 'leader',
    'leader_is_max_id', 'init_time', 'time_excl_init', 'completion_time', 'transmissions',
    'post_init_transmissions', 'work_phases',
]


def _plain(value):
    # numpy scalars do not bind as sqlite parameters
    return value.item() if hasattr(value, 'item') else value


def save_runs(db_path, runs, config):
    """Insert every row of the *runs* DataFrame. Returns the number of rows written."""
    conn = sqlite3.connect(db_path)
    try:
        conn.execute("PRAGMA journal_mode=WAL")
        conn.executescript(_SCHEMA_SQL)
        config_json = json.dumps(config.to_json(), sort_keys=True)
        placeholders = ', '.join('?' for _ in range(len(_COLUMNS) + 3))
        sql = (f"INSERT INTO runs (config_json, x, delay, {', '.join(_COLUMNS)}) "
               f"VALUES ({placeholders})")
        rows = [
            (config_json, float(config.x), config.delay_kind,
             *(_plain(rec[col]) for col in _COLUMNS))
            for rec in runs.to_dict('records')
        ]
        conn.executemany(sql, rows)
        conn.commit()
        return len(rows)
    finally:
        conn.close()


def load_runs(db_path):
    """All stored runs as a DataFrame (oldest first)."""
    import pandas as pd

    conn = sqlite3.connect(db_path)
    try:
        return pd.read_sql_query("SELECT * FROM runs ORDER BY id", conn)
    finally:
        conn.close()


def maybe_save_runs(runs, config):
    """Save to DB if NETSIM_DB_PATH is set. Silent no-op otherwise."""
    db_path = os.environ.get('NETSIM_DB_PATH')
    if not db_path:
        return None
    try:
        return save_runs(db_path, runs, config)
    except Exception as e:
        print(f"[NETSIM DB] Warning: failed to save to database: {e}", file=sys.stderr)
        return None
