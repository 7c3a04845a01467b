"""Dense symmetric linear algebra used throughout the package.

Symmetric matrices are plain ``numpy`` arrays; :func:`as_symmetric` is the
single entry point that validates and symmetrizes them.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from ridgelet.errors import InvalidInput, NotPositiveDefinite

RANK_TOL = 1e-10
ORTHO_TOL = 1e-8


class EigenDecomposition(NamedTuple):
    """Eigenvalues in descending order with matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def _square_finite(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise InvalidInput("matrix has non-finite entries")
    return a


def as_symmetric(a) -> np.ndarray:
    a = _square_finite(a)
    return 0.5 * (a + a.T)


def sym_eigen(a) -> EigenDecomposition:
    a = as_symmetric(a)
    w, v = np.linalg.eigh(a)
    return EigenDecomposition(w[::-1].copy(), v[:, ::-1].copy())


def clamp_small(eigenvalues: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Zero out eigenvalues at or below ``rank_tol * max|lambda|``."""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if eigenvalues.size == 0:
        return eigenvalues.copy()
    scale = np.max(np.abs(eigenvalues))
    out = eigenvalues.copy()
    out[out <= rank_tol * scale] = 0.0
    return out


def spd_solve(a, b) -> np.ndarray:
    """Solve ``a x = b`` for symmetric positive definite ``a`` by Cholesky.

    Only the lower triangle of ``a`` is read.
    """
    a = _square_finite(a)
    b = np.asarray(b, dtype=float)
    try:
        factor = sla.cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    # Cholesky can succeed on a matrix with a tiny non-positive pivot that
    # rounded to a positive value; the diagonal of L catches true failures.
    if np.min(np.diag(factor[0])) <= 0:
        raise NotPositiveDefinite("non-positive Cholesky pivot")
    return sla.cho_solve(factor, b, check_finite=False)


def is_positive_definite(a) -> bool:
    try:
        sla.cholesky(_square_finite(a), lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        return False
    return True


def min_eigenvalue(a) -> float:
    a = as_symmetric(a)
    return float(sla.eigh(a, eigvals_only=True, subset_by_index=[0, 0])[0])


def pseudoinverse(a, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a symmetric PSD matrix."""
    dec = sym_eigen(a)
    lam = clamp_small(dec.eigenvalues, rank_tol)
    inv = np.zeros_like(lam)
    keep = lam > 0
    inv[keep] = 1.0 / lam[keep]
    v = dec.eigenvectors
    return as_symmetric((v * inv) @ v.T)


def _spectral_function(a, fn) -> np.ndarray:
    dec = sym_eigen(a)
    if dec.eigenvalues.size and dec.eigenvalues[-1] <= 0:
        raise NotPositiveDefinite(f"minimum eigenvalue {dec.eigenvalues[-1]:.3g} <= 0")
    v = dec.eigenvectors
    return as_symmetric((v * fn(dec.eigenvalues)) @ v.T)


def inv_sqrt(a) -> np.ndarray:
    return _spectral_function(a, lambda w: 1.0 / np.sqrt(w))


def sqrt_psd(a, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Symmetric square root; eigenvalues below tolerance are set to zero."""
    dec = sym_eigen(a)
    lam = clamp_small(dec.eigenvalues, rank_tol)
    if np.any(lam < 0):
        raise NotPositiveDefinite("matrix is not positive semi-definite")
    v = dec.eigenvectors
    return as_symmetric((v * np.sqrt(lam)) @ v.T)


def check_orthonormal(basis, tol: float = ORTHO_TOL) -> np.ndarray:
    basis = np.asarray(basis, dtype=float)
    if basis.ndim == 1:
        basis = basis[:, None]
    if basis.ndim != 2:
        raise InvalidInput("basis must be a 2-d array")
    if not np.all(np.isfinite(basis)):
        raise InvalidInput("basis has non-finite entries")
    k = basis.shape[1]
    if k and np.max(np.abs(basis.T @ basis - np.eye(k))) > tol:
        raise InvalidInput("basis columns are not orthonormal")
    return basis


def null_projector(basis) -> np.ndarray:
    """``I - U U^T`` for an ``n x k`` orthonormal basis ``U``."""
    basis = check_orthonormal(basis)
    n = basis.shape[0]
    return as_symmetric(np.eye(n) - basis @ basis.T)


def project_out(basis, x) -> np.ndarray:
    """Apply ``I - U U^T`` to ``x`` without forming the projector."""
    x = np.asarray(x, dtype=float)
    if basis.shape[1] == 0:
        return x.copy()
    return x - basis @ (basis.T @ x)


def sample_spectrum(r, rank_tol: float = RANK_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Nonzero spectrum of ``S0 = R R^T / T`` from a thin SVD of ``R``.

    Returns ``(U, lam)`` where ``U`` is ``N x k`` with orthonormal columns
    spanning the column space of ``R`` and ``lam`` holds the matching
    eigenvalues of ``S0`` in descending order. ``k`` is the numerical rank
    under ``rank_tol`` relative to the largest eigenvalue.
    """
    r = np.asarray(r, dtype=float)
    if r.ndim != 2 or r.size == 0:
        raise InvalidInput("return matrix must be a non-empty 2-d array")
    t = r.shape[1]
    u, s, _ = np.linalg.svd(r, full_matrices=False)
    lam = clamp_small(s**2 / t, rank_tol)
    k = int(np.count_nonzero(lam))
    return u[:, :k], lam[:k]
