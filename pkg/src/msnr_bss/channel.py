"""Noisy instantaneous mixing ``x = A (s + v)``.

White Gaussian noise is injected into each source at a per-source SNR
(relative to that source's own mean-square power) and the noisy sources
are then mixed by a square matrix.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .siggen import as_signal_matrix

# Paper demo mixing matrix
PAPER_MIXING_MATRIX = np.array([[0.4684, 0.1952], [0.7384, 0.5483]])


def noise_disabled(snr_db):
    """``None`` or ``+inf`` switch the noise off."""
    return snr_db is None or (math.isinf(snr_db) and snr_db > 0)


@dataclass(frozen=True)
class ChannelSpec:
    """Mixing matrix plus AWGN settings. ``snr_db=None`` disables noise."""

    mixing_matrix: np.ndarray
    snr_db: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        A = np.array(self.mixing_matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"mixing matrix must be square, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValueError("mixing matrix has non-finite entries")
        scale = max(np.abs(A).max(), 1.0) ** A.shape[0]
        if abs(np.linalg.det(A)) <= 1e-12 * scale:
            warnings.warn("mixing matrix is (nearly) singular; sources are not separable",
                          RuntimeWarning, stacklevel=3)
        object.__setattr__(self, "mixing_matrix", A)
        if self.snr_db is not None and math.isnan(self.snr_db):
            raise ValueError("snr_db must not be NaN")


def add_awgn(s, snr_db, seed):
    """Return ``s + v`` with ``v`` i.i.d. N(0, P_i / 10**(snr_db/10)) on channel i.

    ``P_i`` is the mean square of channel ``i``. With noise disabled the
    input is returned unchanged (as a copy).
    """
    s = as_signal_matrix(s)
    if noise_disabled(snr_db):
        return s.copy()
    power = np.mean(s**2, axis=1)
    if np.any(power <= 0):
        raise ValueError("cannot scale noise to an all-zero signal")
    sigma = np.sqrt(power / 10 ** (snr_db / 10))
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(s.shape) * sigma[:, np.newaxis]
    return s + v


def mix(spec, s):
    """Observed mixtures ``A @ add_awgn(s)``."""
    s = as_signal_matrix(s)
    A = spec.mixing_matrix
    if A.shape[1] != s.shape[0]:
        raise ValueError(
            f"mixing matrix is {A.shape[0]}x{A.shape[1]} but there are {s.shape[0]} sources"
        )
    return A @ add_awgn(s, spec.snr_db, spec.seed)


def random_mixing_matrix(n, rng, max_cond=100.0):
    """Uniform(0, 1) entries, redrawn until the condition number is <= ``max_cond``."""
    while True:
        A = rng.uniform(0.0, 1.0, size=(n, n))
        if np.linalg.cond(A) <= max_cond:
            return A
