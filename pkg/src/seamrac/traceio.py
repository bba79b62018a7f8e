"""CSV serialization for traces and metrics tables.

Floats are written with ``repr``, the shortest text that parses back to the
same double, so a write/read cycle is lossless.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import BadCsv
from .sim import COLUMNS, SimTrace


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_trace(trace, path):
    """Header row of column names, then one row per control tick."""
    path = Path(path)
    with path.open("w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in trace.data:
            writer.writerow([repr(float(v)) for v in row])


def read_trace(path):
    path = Path(path)
    with path.open(newline="", encoding="ascii") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != COLUMNS:
        raise BadCsv(f"{path}: header does not match the trace columns")
    try:
        data = [[float(c) for c in row] for row in rows[1:]]
    except ValueError as exc:
        raise BadCsv(f"{path}: {exc}") from None
    if any(len(row) != len(COLUMNS) for row in data):
        raise BadCsv(f"{path}: ragged rows")
    return SimTrace.from_rows(data)


def write_metrics(rows, path, columns):
    """Write a table of dict rows; an empty table yields a header-only file."""
    path = Path(path)
    with path.open("w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c, "")) for c in columns])


def read_metrics(path):
    """Read a metrics table back; numeric cells become floats."""
    with Path(path).open(newline="", encoding="ascii") as fh:
        reader = csv.DictReader(fh)
        out = []
        for row in reader:
            parsed = {}
            for key, value in row.items():
                try:
                    parsed[key] = float(value)
                except ValueError:
                    parsed[key] = value
            out.append(parsed)
    return out
