"""Dense symmetric linear algebra for small matrices.

Cholesky factorization, cyclic Jacobi eigendecomposition and the
symmetric-definite generalized eigenproblem ``C v = lam Cbar v``.
Sizes of interest are the number of mixture channels (2-8), so clarity
wins over blocking or LAPACK-style tricks.
"""

from dataclasses import dataclass

import numpy as np

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


class NotPositiveDefiniteError(ValueError):
    """Raised when a Cholesky pivot is not strictly positive."""

    def __init__(self, pivot):
        self.pivot = pivot
        super().__init__(f"matrix not positive definite (pivot {pivot})")


@dataclass(frozen=True)
class GenEigenResult:
    """Eigenpairs of a symmetric-definite pencil, sorted by descending eigenvalue.

    ``eigenvectors[i]`` is the row vector paired with ``eigenvalues[i]``;
    the vectors are Cbar-orthonormal.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual_norms: np.ndarray


def as_sym_matrix(M, name="matrix"):
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return 0.5 * (M + M.T)


def cholesky(M):
    """Lower-triangular ``L`` with ``L @ L.T == M``.

    Raises
    ------
    NotPositiveDefiniteError
        If a pivot is <= 0; ``err.pivot`` is the failing row index.
    """
    M = as_sym_matrix(M)
    n = M.shape[0]
    L = np.zeros_like(M)
    for j in range(n):
        d = M[j, j] - L[j, :j] @ L[j, :j]
        if not d > 0.0:
            raise NotPositiveDefiniteError(j)
        L[j, j] = np.sqrt(d)
        L[j + 1:, j] = (M[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def solve_lower(L, B):
    """Forward substitution for ``L X = B`` (B may be a vector or matrix)."""
    B = np.array(B, dtype=float)
    X = np.zeros_like(B)
    for i in range(L.shape[0]):
        X[i] = (B[i] - L[i, :i] @ X[:i]) / L[i, i]
    return X


def solve_upper(U, B):
    """Back substitution for ``U X = B``."""
    B = np.array(B, dtype=float)
    X = np.zeros_like(B)
    for i in range(U.shape[0] - 1, -1, -1):
        X[i] = (B[i] - U[i, i + 1:] @ X[i + 1:]) / U[i, i]
    return X


def _off_norm(A):
    return np.linalg.norm(A - np.diag(np.diag(A)))


def _fix_signs(vectors):
    # largest-magnitude component positive; argmax picks the lowest index on ties
    for v in vectors:
        k = np.argmax(np.abs(v))
        if v[k] < 0:
            v *= -1.0
    return vectors


def sym_eigen(M, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    M : array_like, shape (n, n)
        Symmetric matrix (symmetrized on entry).
    tol : float
        Stop once the off-diagonal Frobenius norm is ``<= tol * ||M||_F``.
    max_sweeps : int
        Hard cap on full sweeps.

    Returns
    -------
    eigenvalues : ndarray, shape (n,)
        Sorted descending. Exact ties keep the Jacobi output order.
    eigenvectors : ndarray, shape (n, n)
        Row ``i`` is the unit eigenvector for ``eigenvalues[i]``.
    """
    A = as_sym_matrix(M)
    n = A.shape[0]
    V = np.eye(n)
    scale = np.linalg.norm(A)
    threshold = tol * scale
    for _ in range(max_sweeps):
        if _off_norm(A) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                diff = A[q, q] - A[p, p]
                if abs(diff) * 1e-150 >= abs(apq):
                    # theta**2 would overflow
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = 1.0 if theta == 0.0 else (
                        np.sign(theta) / (abs(theta) + np.sqrt(1.0 + theta * theta)))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap = A[p, :].copy()
                aq = A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    vectors = np.ascontiguousarray(V.T[order])
    return w[order], _fix_signs(vectors)


def generalized_eigen(C, Cbar):
    """Solve ``C v = lam Cbar v`` for symmetric ``C`` and SPD ``Cbar``.

    Reduces to a standard problem with ``Cbar = L L^T``: the eigenvectors
    ``u`` of ``L^-1 C L^-T`` give ``v = L^-T u``.

    Raises
    ------
    NotPositiveDefiniteError
        If ``Cbar`` is not positive definite.
    """
    C = as_sym_matrix(C, "C")
    Cbar = as_sym_matrix(Cbar, "Cbar")
    if C.shape != Cbar.shape:
        raise ValueError(f"shape mismatch: {C.shape} vs {Cbar.shape}")
    L = cholesky(Cbar)
    # M = L^-1 C L^-T
    Y = solve_lower(L, C)
    M = solve_lower(L, Y.T).T
    lam, U = sym_eigen(M)
    vectors = solve_upper(L.T, U.T).T
    vectors = _fix_signs(np.ascontiguousarray(vectors))
    residuals = np.array(
        [np.linalg.norm(C @ v - l * (Cbar @ v)) for l, v in zip(lam, vectors)]
    )
    return GenEigenResult(lam, vectors, residuals)
