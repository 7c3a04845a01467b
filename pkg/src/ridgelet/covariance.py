"""Covariance estimators: sample covariance, ridge anchors, POET and linear shrinkage."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ridgelet.errors import DegenerateFactorCount, InvalidInput
from ridgelet.linalg import (
    RANK_TOL,
    as_symmetric,
    is_positive_definite,
    min_eigenvalue,
    sample_spectrum,
)
from ridgelet.panel import as_matrix

DEFAULT_TAU = 1e-8
DEFAULT_R_MAX = 8
DEFAULT_C1_GRID = tuple(np.geomspace(0.1, 10.0, 21))
PD_REPAIR_EPS = 1e-8


def _centered(panel, demean: bool) -> np.ndarray:
    r = as_matrix(panel)
    if demean:
        r = r - r.mean(axis=1, keepdims=True)
    return r


def sample_cov(panel, demean: bool = False) -> np.ndarray:
    """``S0 = R R^T / T``, optionally after removing each asset's mean."""
    r = _centered(panel, demean)
    return as_symmetric(r @ r.T / r.shape[1])


def ridge_augment(s0, tau: float, anchor=None) -> np.ndarray:
    """``s0 + tau * anchor``; ``anchor=None`` means the identity."""
    if not tau > 0:
        raise InvalidInput(f"tau must be positive, got {tau}")
    s0 = as_symmetric(s0)
    if anchor is None:
        out = s0.copy()
        out[np.diag_indices_from(out)] += tau
        return out
    anchor = np.asarray(anchor, dtype=float)
    if anchor.shape != s0.shape:
        raise InvalidInput("anchor and covariance shapes differ")
    return as_symmetric(s0 + tau * anchor)


def eigenvalue_ratio_r(eigenvalues, r_max: int) -> int:
    """Factor count maximizing ``lambda_i / lambda_{i+1}`` over ``i = 1..r_max``.

    A zero denominator counts as an infinite ratio, so the first such ``i``
    wins. Ties go to the smallest ``i``.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.ndim != 1 or not np.all(np.isfinite(lam)):
        raise InvalidInput("eigenvalues must be a finite 1-d sequence")
    if not 1 <= r_max <= lam.size - 1:
        raise InvalidInput(f"r_max must be in [1, {lam.size - 1}], got {r_max}")
    if np.any(np.diff(lam) > 0):
        raise InvalidInput("eigenvalues must be sorted in descending order")
    if lam[-1] < 0:
        raise InvalidInput("eigenvalues must be non-negative")
    best_i, best = 1, -math.inf
    for i in range(1, r_max + 1):
        num, den = lam[i - 1], lam[i]
        if den == 0:
            return i
        ratio = num / den
        if ratio > best:
            best_i, best = i, ratio
    return best_i


def poet_rate(n: int, t: int, r: int) -> float:
    """Threshold rate ``(r sqrt(log N) + r^2)/sqrt(T) + r^3/sqrt(N) + sqrt(log N / T)``."""
    log_n = math.log(n)
    return (r * math.sqrt(log_n) + r**2) / math.sqrt(t) + r**3 / math.sqrt(n) + math.sqrt(log_n / t)


@dataclass(frozen=True)
class PoetResult:
    r_hat: int
    loadings_hat: np.ndarray
    omega_hat: np.ndarray
    residual_cov: np.ndarray
    threshold_constant: float
    eta_T: float
    thresholds: np.ndarray


class PoetDecomposition:
    """The part of POET that does not depend on the threshold constant.

    Splitting the work lets cross-validation reuse one PCA per fold while
    scanning many threshold constants.
    """

    def __init__(self, panel, r_max: int = DEFAULT_R_MAX, r: int | None = None, demean: bool = False):
        x = _centered(panel, demean)
        n, t = x.shape
        if n < 2 or t < 3:
            raise InvalidInput(f"POET needs N >= 2 and T >= 3, got N={n}, T={t}")
        u, lam = sample_spectrum(x, RANK_TOL)
        if r is None:
            k = lam.size
            if k < 2:
                r_hat = 0 if k == 0 else 1
            else:
                r_hat = eigenvalue_ratio_r(lam, min(r_max, k - 1))
        else:
            r_hat = int(r)
        if r_hat >= n:
            raise DegenerateFactorCount(f"estimated factor count {r_hat} leaves no residual space (N={n})")
        if r_hat > lam.size:
            raise DegenerateFactorCount(f"factor count {r_hat} exceeds rank {lam.size} of S0")
        xi = u[:, :r_hat]
        resid = x - xi @ (xi.T @ x)
        self.n, self.t = n, t
        self.r_hat = r_hat
        self.loadings_hat = xi * np.sqrt(lam[:r_hat])
        self.residuals = resid
        self.residual_cov = as_symmetric(resid @ resid.T / t)
        sq = resid * resid
        theta = sq @ sq.T / t - self.residual_cov**2
        self.theta = np.maximum(theta, 0.0)
        self.eta_T = poet_rate(n, t, r_hat)
        self._sqrt_theta_eta = np.sqrt(self.theta) * self.eta_T

    def threshold(self, c1: float) -> PoetResult:
        if not c1 >= 0:
            raise InvalidInput(f"threshold constant must be non-negative, got {c1}")
        if math.isinf(c1):
            thresholds = np.full_like(self.theta, math.inf)
        else:
            thresholds = c1 * self._sqrt_theta_eta
        np.fill_diagonal(thresholds, 0.0)
        s_u = self.residual_cov
        keep = np.abs(s_u) >= thresholds
        np.fill_diagonal(keep, True)
        omega = np.where(keep, s_u, 0.0)
        return PoetResult(
            r_hat=self.r_hat,
            loadings_hat=self.loadings_hat,
            omega_hat=omega,
            residual_cov=s_u,
            threshold_constant=float(c1),
            eta_T=self.eta_T,
            thresholds=thresholds,
        )


def poet(
    panel,
    r_max: int = DEFAULT_R_MAX,
    c1: float | str = "cv",
    *,
    r: int | None = None,
    grid=DEFAULT_C1_GRID,
    folds: int = 5,
    tau: float = DEFAULT_TAU,
    demean: bool = False,
) -> PoetResult:
    """POET idiosyncratic covariance estimate.

    ``c1="cv"`` picks the threshold constant with :func:`poet_cv_c1`.
    ``r`` fixes the factor count instead of estimating it.
    """
    if isinstance(c1, str):
        if c1 != "cv":
            raise InvalidInput(f"c1 must be a number or 'cv', got {c1!r}")
        c1 = poet_cv_c1(panel, grid=grid, folds=folds, tau=tau, r_max=r_max, r=r, demean=demean)
    return PoetDecomposition(panel, r_max=r_max, r=r, demean=demean).threshold(float(c1))


def repair_pd(omega) -> tuple[np.ndarray, float]:
    """Shift a non-PD estimate by ``(|lambda_min| + 1e-8) I``; returns the shift used."""
    omega = as_symmetric(omega)
    if is_positive_definite(omega):
        return omega, 0.0
    eps = abs(min_eigenvalue(omega)) + PD_REPAIR_EPS
    out = omega.copy()
    out[np.diag_indices_from(out)] += eps
    return out, eps


def fold_blocks(t: int, folds: int) -> list[np.ndarray]:
    """Contiguous, nearly equal index blocks covering ``range(t)``."""
    return [b for b in np.array_split(np.arange(t), folds)]


def poet_cv_c1(
    panel,
    grid=DEFAULT_C1_GRID,
    folds: int = 5,
    *,
    tau: float = DEFAULT_TAU,
    r_max: int = DEFAULT_R_MAX,
    r: int | None = None,
    demean: bool = False,
    return_scores: bool = False,
):
    """Threshold constant minimizing held-out variance of Ridgelet2 weights.

    Each fold holds out one contiguous time block, fits POET and Ridgelet2
    on the remaining observations, and scores the realized variance of the
    held-out portfolio returns. Ties resolve to the smallest constant.
    """
    from ridgelet.weights import ridgelet2_from_cov

    grid = np.asarray(list(grid), dtype=float)
    if grid.size == 0:
        raise InvalidInput("threshold grid is empty")
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise InvalidInput("threshold grid must be finite and non-negative")
    x = as_matrix(panel)
    t = x.shape[1]
    if folds < 2:
        raise InvalidInput("need at least 2 folds")
    if t < 2 * folds:
        raise InvalidInput(f"T={t} too short for {folds} folds")
    if grid.size == 1:
        return (float(grid[0]), np.zeros(1)) if return_scores else float(grid[0])

    scores = np.zeros(grid.size)
    for block in fold_blocks(t, folds):
        train_idx = np.setdiff1d(np.arange(t), block)
        train, test = x[:, train_idx], x[:, block]
        dec = PoetDecomposition(train, r_max=r_max, r=r, demean=demean)
        s0 = sample_cov(train, demean=demean)
        cache: dict[bytes, float] = {}
        for g, c1 in enumerate(grid):
            res = dec.threshold(c1)
            key = np.packbits(res.omega_hat != 0).tobytes()
            if key not in cache:
                omega, _ = repair_pd(res.omega_hat)
                w = ridgelet2_from_cov(s0, omega, tau)
                p = w @ test
                if demean:
                    p = p - p.mean()
                cache[key] = float(np.mean(p * p))
            scores[g] += cache[key]
    scores /= folds
    best = scores.min()
    tied = grid[scores <= best]
    c1 = float(tied.min())
    return (c1, scores) if return_scores else c1


def linear_shrinkage(panel, demean: bool = False) -> np.ndarray:
    """Optimal convex combination of ``S0`` and ``mu I`` with ``mu = tr(S0)/N``."""
    x = _centered(panel, demean)
    n, t = x.shape
    if t < 2:
        raise InvalidInput("linear shrinkage needs T >= 2")
    s = as_symmetric(x @ x.T / t)
    mu = np.trace(s) / n
    if not mu > 0:
        raise InvalidInput("panel has zero variance")
    target_gap = s.copy()
    target_gap[np.diag_indices_from(target_gap)] -= mu
    d2 = np.sum(target_gap**2) / n
    if d2 == 0:
        return s
    norms = np.sum(x * x, axis=0)
    b_bar2 = (np.sum(norms**2) - t * np.sum(s * s)) / (t**2 * n)
    b2 = min(max(b_bar2, 0.0), d2)
    shrink = b2 / d2
    out = (1.0 - shrink) * s
    out[np.diag_indices_from(out)] += shrink * mu
    return out
