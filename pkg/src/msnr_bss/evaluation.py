"""Separation quality: correlation coefficient and permutation alignment."""

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .siggen import as_signal_matrix

MAX_ALIGN_CHANNELS = 8


@dataclass(frozen=True)
class AlignmentReport:
    """Best source/output pairing by absolute correlation.

    ``corr_matrix[i, j]`` is the correlation of source ``i`` with output
    ``j``; source ``i`` is matched to output ``assignment[i]``.
    """

    corr_matrix: np.ndarray
    assignment: tuple
    per_source_corr: np.ndarray
    mean_corr: float

    def as_row(self):
        """Flat mapping ``mean_corr, corr_i..., assign_i...`` for CSV output."""
        row = {"mean_corr": self.mean_corr}
        for i, c in enumerate(self.per_source_corr):
            row[f"corr_{i}"] = float(c)
        for i, j in enumerate(self.assignment):
            row[f"assign_{i}"] = j
        return row


def corrcoef(a, b):
    """Pearson correlation of two equal-length signals.

    Raises ``ValueError`` if either signal is constant.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size != b.size or a.size < 2:
        raise ValueError("signals must have equal length >= 2")
    da = a - a.mean()
    db = b - b.mean()
    saa = da @ da
    sbb = db @ db
    if saa == 0 or sbb == 0:
        raise ValueError("undefined correlation for constant signal")
    r = (da @ db) / (np.sqrt(saa) * np.sqrt(sbb))
    return float(min(1.0, max(-1.0, r)))


def align(sources, outputs):
    """Match outputs to sources, maximizing the summed absolute correlation.

    Exhaustive over all permutations, so limited to 8 channels.
    """
    sources = as_signal_matrix(sources, "sources")
    outputs = as_signal_matrix(outputs, "outputs")
    if sources.shape != outputs.shape:
        raise ValueError(f"shape mismatch: sources {sources.shape}, outputs {outputs.shape}")
    n = sources.shape[0]
    if n > MAX_ALIGN_CHANNELS:
        raise ValueError(f"alignment supports at most {MAX_ALIGN_CHANNELS} channels")
    R = np.array([[corrcoef(sources[i], outputs[j]) for j in range(n)] for i in range(n)])
    absR = np.abs(R)
    rows = np.arange(n)
    best = max(permutations(range(n)), key=lambda p: absR[rows, list(p)].sum())
    per_source = absR[rows, list(best)]
    return AlignmentReport(R, tuple(best), per_source, float(per_source.mean()))
