"""Minimum-variance weight rules.

Every rule returns a :class:`WeightVector` on the affine hyperplane
``sum(w) == 1``. Short positions are allowed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ridgelet.covariance import DEFAULT_TAU, ridge_augment, sample_cov
from ridgelet.errors import (
    InfeasibleProjection,
    InfeasibleZVP,
    InvalidInput,
    NumericalBreakdown,
)
from ridgelet.linalg import RANK_TOL, check_orthonormal, project_out, sample_spectrum, spd_solve
from ridgelet.panel import as_matrix

METHOD_TAGS = (
    "oracle",
    "plugin",
    "ridgelet1",
    "ridgelet2",
    "ridgelet2_ifs",
    "ridgeless",
    "exact_zvp",
    "equal",
    "factor_eliminating",
    "ls",
)

ZVP_FEASIBILITY_TOL = 1e-8
RIDGELESS_DENOM_TOL = 1e-14


@dataclass(frozen=True)
class WeightVector:
    weights: np.ndarray
    method: str

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or not np.all(np.isfinite(w)):
            raise NumericalBreakdown(f"{self.method}: weights are not a finite vector")
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.weights.size

    def __array__(self, dtype=None, copy=None):
        return self.weights if dtype is None else self.weights.astype(dtype)


def _normalize(x: np.ndarray, method: str, tol: float = 0.0) -> WeightVector:
    denom = x.sum()
    if not denom > tol:
        raise NumericalBreakdown(f"{method}: normalizing constant {denom:.3g} is not positive")
    return WeightVector(x / denom, method)


def mvp_weight(cov, method: str = "plugin") -> WeightVector:
    """``cov^{-1} 1 / (1^T cov^{-1} 1)`` via a Cholesky solve."""
    cov = np.asarray(cov, dtype=float)
    x = spd_solve(cov, np.ones(cov.shape[0]))
    return _normalize(x, method)


def oracle_weight(sigma) -> WeightVector:
    return mvp_weight(sigma, method="oracle")


def plugin_weight(panel, demean: bool = False) -> WeightVector:
    return mvp_weight(sample_cov(panel, demean), method="plugin")


def ridgelet1_weight(panel, tau: float = DEFAULT_TAU, demean: bool = False) -> WeightVector:
    """Minimum-variance weights from ``S0 + tau I`` with a fixed tiny ``tau``."""
    s_tau = ridge_augment(sample_cov(panel, demean), tau)
    return mvp_weight(s_tau, method="ridgelet1")


def ridgelet2_from_cov(s0, omega_hat, tau: float = DEFAULT_TAU) -> np.ndarray:
    return mvp_weight(ridge_augment(s0, tau, omega_hat), method="ridgelet2").weights


def ridgelet2_weight(panel, omega_hat, tau: float = DEFAULT_TAU, demean: bool = False) -> WeightVector:
    """Minimum-variance weights from ``S0 + tau * omega_hat``.

    ``omega_hat`` must already be positive definite; see
    :func:`ridgelet.covariance.repair_pd`.
    """
    s_tau = ridge_augment(sample_cov(panel, demean), tau, omega_hat)
    return mvp_weight(s_tau, method="ridgelet2")


def _spectrum(panel, demean: bool, rank_tol: float):
    r = as_matrix(panel)
    if demean:
        r = r - r.mean(axis=1, keepdims=True)
    return r, *sample_spectrum(r, rank_tol)


def ridgeless_weight(panel, demean: bool = False, rank_tol: float = RANK_TOL) -> WeightVector:
    """``S0^+ 1 / (1^T S0^+ 1)``; confined to the column space of the returns."""
    _, u, lam = _spectrum(panel, demean, rank_tol)
    n = u.shape[0]
    eta = u.T @ np.ones(n)
    x = u @ (eta / lam)
    return _normalize(x, "ridgeless", RIDGELESS_DENOM_TOL)


def exact_zvp_weight(panel, demean: bool = False, rank_tol: float = RANK_TOL) -> WeightVector:
    """Minimum-norm weights with ``R^T w = 0``: ``P 1 / (1^T P 1)``, ``P`` the null-space projector."""
    _, u, _ = _spectrum(panel, demean, rank_tol)
    n = u.shape[0]
    if u.shape[1] >= n:
        raise InfeasibleZVP(f"returns have full row rank {n}; no zero-variance portfolio exists")
    p1 = project_out(u, np.ones(n))
    if np.linalg.norm(p1) / np.sqrt(n) <= ZVP_FEASIBILITY_TOL:
        raise InfeasibleZVP("the ones vector lies in the span of the returns")
    return WeightVector(p1 / p1.sum(), "exact_zvp")


def equal_weight(n: int) -> WeightVector:
    if n < 1:
        raise InvalidInput("need at least one asset")
    return WeightVector(np.full(n, 1.0 / n), "equal")


def factor_eliminating_weight(v, tol: float = ZVP_FEASIBILITY_TOL) -> WeightVector:
    """``P_V 1 / (1^T P_V 1)`` with ``P_V`` projecting off the orthonormal columns of ``v``."""
    v = check_orthonormal(v)
    n = v.shape[0]
    p1 = project_out(v, np.ones(n))
    denom = p1.sum()
    if not denom > tol * n:
        raise InfeasibleProjection("the ones vector lies in the factor loading space")
    return WeightVector(p1 / denom, "factor_eliminating")
