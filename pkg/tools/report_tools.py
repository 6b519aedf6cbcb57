"""
Report Tools - write experiment reports as report.json plus CSV tables
"""
import json
import os
from typing import List

import pandas as pd

import sys

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import ReportIOError

COLUMNS = {
    "error_vs_M.csv": ["kind", "M", "L2_error", "stderr", "N", "t", "qoi"],
    "error_vs_t.csv": ["kind", "t", "L2_error", "stderr", "N", "M", "qoi"],
    "density.csv": ["kind", "N", "M", "t", "w", "estimate", "reference"],
    "lorenz.csv": ["kind", "N", "M", "t", "F", "estimate", "reference"],
    "timings.csv": ["kind", "N", "M", "replication", "wall_time"],
}

TABLES = {
    "error_vs_M.csv": "error_vs_M",
    "error_vs_t.csv": "error_vs_t",
    "density.csv": "density",
    "lorenz.csv": "lorenz",
    "timings.csv": "timings",
}


def _write_table(rows: List[dict], columns: List[str], path: str):
    frame = pd.DataFrame(rows, columns=columns)
    frame.to_csv(path, index=False, float_format="%.17g")


def emit_report(report, directory: str) -> List[str]:
    """Write report.json and the CSV tables into `directory`

    Args:
        report: ExperimentReport
        directory: output directory, created if missing

    Returns:
        list: paths written
    """
    written = []
    path = directory
    try:
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, "report.json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump(report.ledger(), f, indent=2, sort_keys=True, default=float)
            f.write("\n")
        written.append(path)

        for filename, attribute in TABLES.items():
            path = os.path.join(directory, filename)
            _write_table(getattr(report, attribute), COLUMNS[filename], path)
            written.append(path)
    except OSError as e:
        raise ReportIOError(f"could not write report ({e.strerror})", path) from e
    return written
