"""
Data Access Object for the analysis run log.

Handles all database read/write operations for recorded analysis reports.
"""

import json
import uuid
from datetime import datetime, timezone
from typing import List, Optional

from config.database import get_connection
from model.report import AnalysisReport


def _row_to_report(row) -> AnalysisReport:
    report = AnalysisReport.from_dict(json.loads(row["report_json"]), run_id=row["run_id"])
    return report


class ReportDAO:
    @staticmethod
    def insert_report(report: AnalysisReport) -> str:
        """Insert a report. Returns the generated run_id."""
        run_id = report.run_id or str(uuid.uuid4())
        data = report.to_dict()
        conn = get_connection()
        conn.execute("""
            INSERT INTO analysis_runs (
                run_id, model_id, direction, objective, bound, bound_kind,
                threshold, verdict, explored_beliefs, cut_transitions,
                clip_transitions, eta, wall_time_ms, report_json, created_at
            ) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
        """, (
            run_id,
            report.model_id,
            report.direction,
            report.objective,
            str(data["bound"]),
            report.bound_kind,
            data["threshold"],
            report.verdict,
            report.explored_beliefs,
            report.cut_transitions,
            report.clip_transitions,
            report.eta,
            report.wall_time_ms,
            json.dumps(data, sort_keys=True),
            datetime.now(timezone.utc).strftime("%Y-%m-%d %H:%M:%S"),
        ))
        conn.commit()
        return run_id

    @staticmethod
    def get_report(run_id: str) -> Optional[AnalysisReport]:
        conn = get_connection()
        row = conn.execute(
            "SELECT run_id, report_json FROM analysis_runs WHERE run_id = ?",
            (run_id,)
        ).fetchone()
        if not row:
            return None
        return _row_to_report(row)

    @staticmethod
    def list_recent_reports(model_id: Optional[str] = None, limit: int = 20) -> List[dict]:
        """Recent runs, newest first, as {run_id, created_at, report}."""
        conn = get_connection()
        if model_id:
            rows = conn.execute(
                "SELECT run_id, report_json, created_at FROM analysis_runs "
                "WHERE model_id = ? ORDER BY created_at DESC, rowid DESC LIMIT ?",
                (model_id, limit)
            ).fetchall()
        else:
            rows = conn.execute(
                "SELECT run_id, report_json, created_at FROM analysis_runs "
                "ORDER BY created_at DESC, rowid DESC LIMIT ?",
                (limit,)
            ).fetchall()
        return [
            {"run_id": row["run_id"], "created_at": row["created_at"], "report": _row_to_report(row)}
            for row in rows
        ]

    @staticmethod
    def delete_report(run_id: str) -> bool:
        """Delete one run. Returns True when a row was deleted."""
        conn = get_connection()
        cur = conn.execute("DELETE FROM analysis_runs WHERE run_id = ?", (run_id,))
        conn.commit()
        return cur.rowcount > 0
