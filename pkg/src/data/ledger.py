"""sqlite ledger of study runs: what ran, under which config, with which seeds."""

import json
import logging
import sqlite3
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Generator, List, Optional

import numpy as np
import pandas as pd
import scipy

from config import VERSION

logger = logging.getLogger(__name__)


def package_versions() -> Dict[str, str]:
    return {"timesobol": VERSION, "numpy": np.__version__, "scipy": scipy.__version__, "pandas": pd.__version__}


class RunLedger:
    """Manages the run database and its schema."""

    REQUIRED_COLUMNS = {
        'id', 'config_hash', 'subcommand', 'seeds', 'tolerances', 'versions',
        'artifacts', 'status', 'message', 'started_at', 'finished_at'
    }

    def __init__(self, db_path: Path):
        self.db_path = Path(db_path)
        self.schema = """
        CREATE TABLE IF NOT EXISTS runs (
            id INTEGER PRIMARY KEY AUTOINCREMENT,
            config_hash TEXT NOT NULL,
            subcommand TEXT NOT NULL,
            seeds TEXT,
            tolerances TEXT,
            versions TEXT,
            artifacts TEXT,
            status TEXT NOT NULL,
            message TEXT,
            started_at TEXT NOT NULL,
            finished_at TEXT
        );

        CREATE INDEX IF NOT EXISTS idx_runs_config_hash ON runs(config_hash);
        CREATE INDEX IF NOT EXISTS idx_runs_status ON runs(status);
        """

    @contextmanager
    def connect(self) -> Generator[sqlite3.Connection, None, None]:
        """Open a connection to the ledger file, committing on clean exit."""
        conn = None
        try:
            self.db_path.parent.mkdir(parents=True, exist_ok=True)
            conn = sqlite3.connect(self.db_path)
            conn.row_factory = sqlite3.Row
            yield conn
            conn.commit()
        except sqlite3.Error as e:
            logger.error(f"Run ledger error: {e}")
            raise
        finally:
            if conn:
                conn.close()

    def init_database(self) -> bool:
        """Create the runs table if it is missing."""
        try:
            with self.connect() as conn:
                conn.executescript(self.schema)
            return True
        except sqlite3.Error as e:
            logger.error(f"Failed to initialize run ledger: {e}")
            return False

    def verify_database(self) -> bool:
        """Verify the runs table exists with the expected columns"""
        try:
            with self.connect() as conn:
                cursor = conn.execute("PRAGMA table_info(runs)")
                columns = {row['name'] for row in cursor.fetchall()}
        except sqlite3.Error as e:
            logger.error(f"Run ledger verification failed: {e}")
            return False
        if not self.REQUIRED_COLUMNS.issubset(columns):
            logger.error(f"Run ledger missing columns: {self.REQUIRED_COLUMNS - columns}")
            return False
        return True

    def start_run(self, config_hash: str, subcommand: str, seeds: Dict, tolerances: Dict) -> int:
        with self.connect() as conn:
            cursor = conn.execute(
                """INSERT INTO runs (config_hash, subcommand, seeds, tolerances, versions, status, started_at)
                   VALUES (?, ?, ?, ?, ?, 'running', ?)""",
                (
                    config_hash,
                    subcommand,
                    json.dumps(seeds, sort_keys=True),
                    json.dumps(tolerances, sort_keys=True),
                    json.dumps(package_versions(), sort_keys=True),
                    datetime.now(timezone.utc).isoformat(),
                ),
            )
            return int(cursor.lastrowid)

    def finish_run(self, run_id: int, status: str, artifacts: Optional[List[str]] = None, message: str = "") -> None:
        with self.connect() as conn:
            conn.execute(
                "UPDATE runs SET status = ?, artifacts = ?, message = ?, finished_at = ? WHERE id = ?",
                (status, json.dumps(artifacts or []), message, datetime.now(timezone.utc).isoformat(), run_id),
            )

    def runs(self) -> pd.DataFrame:
        with self.connect() as conn:
            return pd.read_sql_query("SELECT * FROM runs ORDER BY id", conn)
