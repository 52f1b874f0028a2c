"""CSV reading and writing for time series and plot matrices.

Time series files use the two-column ``t_s,v_volts`` schema. Every float is
written with 12 significant digits so that repeated runs are byte-identical.
"""
from __future__ import annotations

import csv
import math
import os
from pathlib import Path

import numpy as np

from .errors import ParseError
from .signals import TimeSeries

HEADER = ("t_s", "v_volts")
JITTER_TOL = 1e-3


def fmt(value: float) -> str:
    return f"{float(value):.12g}"


def write_matrix(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return path


def write_csv(ts: TimeSeries, path) -> Path:
    return write_matrix(path, HEADER, zip(ts.times, ts.samples))


def ingest_csv(path, jitter_tol: float = JITTER_TOL) -> TimeSeries:
    """Read a ``t_s,v_volts`` file into a TimeSeries.

    dt is the median timestep; any step deviating from it by more than
    ``jitter_tol`` (relative) is reported by row number (header is row 1).
    """
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = tuple(c.strip() for c in rows[0])
    if header != HEADER:
        raise ParseError(f"{path}: expected header {','.join(HEADER)}, got {','.join(header)}")
    body = rows[1:]
    if not body:
        raise ParseError(f"{path}: no data rows")

    t = np.empty(len(body))
    v = np.empty(len(body))
    for k, row in enumerate(body):
        lineno = k + 2
        if len(row) != 2:
            raise ParseError(f"{path}: row {lineno}: expected 2 columns, got {len(row)}")
        for col, (name, arr) in enumerate((("t_s", t), ("v_volts", v))):
            try:
                val = float(row[col])
            except ValueError:
                raise ParseError(f"{path}: row {lineno}: non-numeric {name} {row[col]!r}") from None
            if not math.isfinite(val):
                raise ParseError(f"{path}: row {lineno}: non-finite {name}")
            arr[k] = val
    if t.size < 2:
        raise ParseError(f"{path}: need at least 2 samples")

    steps = np.diff(t)
    if np.any(steps <= 0):
        bad = np.flatnonzero(steps <= 0) + 3
        raise ParseError(f"{path}: timestamps not strictly increasing at rows {bad.tolist()}")
    dt = float(np.median(steps))
    bad = np.flatnonzero(np.abs(steps - dt) > jitter_tol * dt)
    if bad.size:
        raise ParseError(
            f"{path}: non-uniform sampling (>{jitter_tol:.1%} jitter) at rows {(bad + 3).tolist()}"
        )
    return TimeSeries(v, dt, {"source": os.fspath(path)})
