"""Closed-form maximum-SNR blind source separation.

The separated signal ``y = W x`` is scored per output row by

    f_i = 10 log10( (w_i C w_i^T) / (w_i Cbar w_i^T) )

with ``C = x x^T / N`` and ``Cbar = (xbar - x)(xbar - x)^T / N``, where
``xbar`` is a causal moving average of the mixtures. Stationary points of
``f`` are the generalized eigenvectors of the pencil ``(C, Cbar)``, so the
whole demixing matrix comes out of one eigen solve, no iterations.
"""

import math
from dataclasses import dataclass

import numpy as np

from .linalg import NotPositiveDefiniteError, as_sym_matrix, generalized_eigen
from .siggen import as_signal_matrix

RIDGE_EPS = 1e-10
GRADIENT_SCALE = 20.0 / math.log(10.0)


class DegenerateStatisticsError(ValueError):
    """The averaged-difference covariance is singular; no demixing exists."""


@dataclass(frozen=True)
class DemixingSolution:
    """Demixing matrix and its per-row SNR figures.

    Attributes
    ----------
    W : ndarray, shape (n, n)
        Row ``i`` extracts output ``i``; rows sorted by descending eigenvalue.
    eigenvalues : ndarray, shape (n,)
        Generalized eigenvalues ``V_i / U_i``.
    ma_length : int
        Moving-average length used.
    objective_db : ndarray, shape (n,)
        ``10 * log10(eigenvalues)``.
    ridge_applied : bool
        True if Cbar had to be regularized to factor.
    """

    W: np.ndarray
    eigenvalues: np.ndarray
    ma_length: int
    objective_db: np.ndarray
    ridge_applied: bool = False

    @property
    def eigen_gap(self):
        """Ratio of the two largest eigenvalues (``inf`` for a single channel)."""
        if self.eigenvalues.size < 2:
            return math.inf
        return self.eigenvalues[0] / self.eigenvalues[1]


def _check_length(L, n_samples):
    if int(L) != L or L < 2:
        raise ValueError(f"moving-average length must be an integer >= 2, got {L!r}")
    if L > n_samples:
        raise ValueError(f"moving-average length {L} exceeds the {n_samples} available samples")
    return int(L)


def averaged_difference(x, L):
    """``xbar - x`` computed as the window mean of ``x[n-j] - x[n]``.

    Working with differences keeps the result exactly zero for constant
    channels.
    """
    x = as_signal_matrix(x)
    n = x.shape[1]
    L = _check_length(L, n)
    acc = np.zeros_like(x)
    for j in range(1, L):
        acc[:, j:] += x[:, :-j] - x[:, j:]
    width = np.minimum(np.arange(1, n + 1), L)
    return acc / width


def moving_average(x, L):
    """Causal moving average with a window that shrinks at the start of the record.

    ``xbar[n] = mean(x[max(0, n-L+1) : n+1])``.
    """
    x = as_signal_matrix(x)
    return x + averaged_difference(x, L)


def correlation_matrices(x, L, normalize=True):
    """Second-moment matrices ``(C, Cbar)`` of the mixtures.

    With ``normalize`` both are divided by the sample count; the demixing
    matrix does not depend on it.
    """
    x = as_signal_matrix(x)
    d = averaged_difference(x, L)
    n = x.shape[1] if normalize else 1
    C = x @ x.T / n
    Cbar = d @ d.T / n
    return 0.5 * (C + C.T), 0.5 * (Cbar + Cbar.T)


def _row_terms(W, C, Cbar):
    W = np.atleast_2d(np.asarray(W, dtype=float))
    C = as_sym_matrix(C, "C")
    Cbar = as_sym_matrix(Cbar, "Cbar")
    if W.shape[1] != C.shape[0] or C.shape != Cbar.shape:
        raise ValueError(f"shape mismatch: W {W.shape}, C {C.shape}, Cbar {Cbar.shape}")
    V = np.einsum("ij,jk,ik->i", W, C, W)
    U = np.einsum("ij,jk,ik->i", W, Cbar, W)
    for i, u in enumerate(U):
        if not u > 0:
            raise ValueError(f"degenerate denominator for row {i}")
    return W, C, Cbar, V, U


def objective(W, C, Cbar):
    """Per-row SNR contrast ``10 log10(w C w^T / w Cbar w^T)`` in dB."""
    _, _, _, V, U = _row_terms(W, C, Cbar)
    return 10.0 * np.log10(V / U)


def objective_gradient(W, C, Cbar):
    """Analytic gradient of :func:`objective`, one row per demixing row.

    ``g_i = (20 / ln 10) * (C w_i / V_i - Cbar w_i / U_i)``.
    """
    W, C, Cbar, V, U = _row_terms(W, C, Cbar)
    return GRADIENT_SCALE * ((W @ C) / V[:, np.newaxis] - (W @ Cbar) / U[:, np.newaxis])


def solve_from_matrices(C, Cbar, ma_length=None):
    ridge = False
    try:
        res = generalized_eigen(C, Cbar)
    except NotPositiveDefiniteError:
        Cbar = as_sym_matrix(Cbar, "Cbar")
        n = Cbar.shape[0]
        bump = RIDGE_EPS * np.trace(Cbar) / n
        try:
            if not bump > 0:
                raise NotPositiveDefiniteError(0)
            res = generalized_eigen(C, Cbar + bump * np.eye(n))
        except NotPositiveDefiniteError:
            raise DegenerateStatisticsError(
                "signals too smooth or L degenerate: averaged-difference covariance is singular"
            ) from None
        ridge = True
    lam = res.eigenvalues
    with np.errstate(divide="ignore", invalid="ignore"):
        obj = 10.0 * np.log10(lam)
    return DemixingSolution(res.eigenvectors, lam, ma_length, obj, ridge)


def solve_demixing(x, L):
    """Demixing matrix maximizing the per-row SNR contrast of ``W x``.

    Parameters
    ----------
    x : array_like, shape (n_channels, n_samples)
        Observed mixtures. Needs at least ``max(L, 10 * n_channels)`` samples.
    L : int
        Moving-average length, ``>= 2``.

    Returns
    -------
    DemixingSolution
    """
    x = as_signal_matrix(x, "mixtures")
    n_ch, n = x.shape
    L = _check_length(L, n)
    if n < 10 * n_ch:
        raise ValueError(f"need at least {10 * n_ch} samples for {n_ch} channels, got {n}")
    C, Cbar = correlation_matrices(x, L)
    return solve_from_matrices(C, Cbar, L)


def apply_demixing(W, x):
    """Separated signals ``y = W x``."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    x = as_signal_matrix(x)
    if W.shape != (x.shape[0], x.shape[0]):
        raise ValueError(f"demixing matrix {W.shape} does not fit {x.shape[0]} channels")
    return W @ x
