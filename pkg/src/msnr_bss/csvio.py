"""Signal CSV files: header ``ch0,ch1,...``, one sample per row."""

import csv
from pathlib import Path

import numpy as np

from .siggen import as_signal_matrix


class SignalFileError(ValueError):
    pass


def format_float(v):
    # 17 significant digits round-trips any double
    return format(float(v), ".17g")


def store_signals(x, path):
    x = as_signal_matrix(x)
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"ch{i}" for i in range(x.shape[0])])
        for sample in x.T:
            w.writerow([format_float(v) for v in sample])


def load_signals(path):
    """Read a signal CSV written by :func:`store_signals` (or compatible)."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [(lineno, r) for lineno, r in enumerate(rows, start=1) if any(c.strip() for c in r)]
    if len(rows) < 2:
        raise SignalFileError(f"{path}: no samples")
    _, header = rows[0]
    n = len(header)
    data = []
    for lineno, r in rows[1:]:
        if len(r) != n:
            raise SignalFileError(f"{path}: line {lineno}: expected {n} columns, got {len(r)}")
        try:
            values = [float(c) for c in r]
        except ValueError:
            raise SignalFileError(f"{path}: line {lineno}: non-numeric value") from None
        if not all(np.isfinite(values)):
            raise SignalFileError(f"{path}: line {lineno}: non-finite value")
        data.append(values)
    return np.array(data, dtype=float).T
