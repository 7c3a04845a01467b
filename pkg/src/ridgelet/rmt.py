"""Random-matrix limits for the out-of-sample variance of Ridgelet weights.

``m(-tau)`` is the Stieltjes transform at ``z = -tau`` of the limiting
spectrum of the companion matrix ``Z^T Omega Z / T``. It solves

    m = 1 / (tau + gamma * mean_k(lambda_k / (1 + lambda_k m)))

where ``lambda_k`` are the eigenvalues of ``Omega`` and ``gamma = N / T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ridgelet.errors import InvalidInput, OutOfRegime, SolverFailed
from ridgelet.weights import factor_eliminating_weight

REGIMES = ("under", "over_identity", "infinite")


@dataclass(frozen=True)
class SpectralLimitInput:
    omega_eigenvalues: np.ndarray
    gamma: float
    tau: float

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.omega_eigenvalues, dtype=float))
        if lam.size == 0 or not np.all(np.isfinite(lam)) or np.any(lam < 0):
            raise InvalidInput("Omega eigenvalues must be finite and non-negative")
        if not self.gamma > 0:
            raise InvalidInput("gamma must be positive")
        if not self.tau > 0:
            raise InvalidInput("tau must be positive (z = -tau must lie off the support)")
        object.__setattr__(self, "omega_eigenvalues", lam)


def _fixed_point_map(lam: np.ndarray, gamma: float, tau: float):
    def g(m):
        return 1.0 / (tau + gamma * np.mean(lam / (1.0 + lam * m)))

    return g


def fixed_point_residual(m: float, inp: SpectralLimitInput) -> float:
    """Relative residual ``|m - g(m)| / m`` of the self-consistent equation."""
    g = _fixed_point_map(inp.omega_eigenvalues, inp.gamma, inp.tau)
    return abs(m - g(m)) / abs(m)


def stieltjes_m(
    inp: SpectralLimitInput | None = None,
    *,
    omega_eigenvalues=None,
    gamma: float | None = None,
    tau: float | None = None,
    tol: float = 1e-12,
    max_iter: int = 100_000,
    damping: float = 0.5,
) -> float:
    """Solve for ``m(-tau) > 0`` by damped fixed-point iteration with Aitken steps."""
    if inp is None:
        inp = SpectralLimitInput(omega_eigenvalues, gamma, tau)
    g = _fixed_point_map(inp.omega_eigenvalues, inp.gamma, inp.tau)

    def step(m):
        return (1.0 - damping) * m + damping * g(m)

    def resid(m):
        return abs(m - g(m))

    m = g(0.0)
    for _ in range(max_iter):
        m1 = step(m)
        m2 = step(m1)
        nxt = m2
        denom = m2 - 2.0 * m1 + m
        if denom != 0.0:
            acc = m - (m1 - m) ** 2 / denom
            if acc > 0 and resid(acc) < resid(m2):
                nxt = acc
        done = abs(nxt - m) <= tol * max(1.0, abs(m))
        m = nxt
        if done:
            break
    else:
        raise SolverFailed("Stieltjes fixed point did not converge", m, resid(m) / m)
    rel = resid(m) / m
    if not (m > 0 and rel <= 1e-10):
        raise SolverFailed("Stieltjes fixed point converged to an invalid point", m, rel)
    return float(m)


def c_tau(m: float, omega_eigenvalues, t_window: int) -> float:
    """``1 / (1 - m^2 tr[(I + m Omega)^{-2} Omega^2] / T)``, always >= 1."""
    lam = np.asarray(omega_eigenvalues, dtype=float)
    if m < 0:
        raise InvalidInput("m must be non-negative")
    if t_window < 1:
        raise InvalidInput("t_window must be positive")
    ml = m * lam
    denom = 1.0 - np.sum((ml / (1.0 + ml)) ** 2) / t_window
    if not denom > 0:
        raise OutOfRegime(f"c(tau) denominator {denom:.3g} is not positive")
    return float(1.0 / denom)


def rv_limit(regime: str, gamma: float | None = None) -> float:
    """Limiting relative variance of Ridgelet1 by regime of ``gamma = N/T``."""
    if regime == "under":
        if gamma is None or not 0 < gamma < 1:
            raise InvalidInput("regime 'under' needs gamma in (0, 1)")
        return 1.0 / (1.0 - gamma)
    if regime == "over_identity":
        if gamma is None or not gamma > 1:
            raise InvalidInput("regime 'over_identity' needs gamma in (1, inf)")
        return gamma / (gamma - 1.0)
    if regime == "infinite":
        return 1.0
    raise InvalidInput(f"unknown regime {regime!r}; expected one of {REGIMES}")


def v_omega_v(spec) -> float:
    """Variance of the factor-eliminating weight, ``w_V^T Omega w_V``."""
    w = factor_eliminating_weight(spec.factor_basis).weights
    return float(w @ spec.omega @ w)


def ridgelet1_variance_limit(spec, t_window: int, tau: float = 1e-8) -> float:
    """Leading-order OOS variance of Ridgelet1 when ``N > T``.

    ``c(tau) * tr(Omega)/N / (1^T P_V 1)`` with ``P_V`` the projector off the
    factor loading space.
    """
    n = spec.n_assets
    if not n > t_window:
        raise OutOfRegime("variance limit applies only when N > T")
    lam = np.linalg.eigvalsh(spec.omega)
    m = stieltjes_m(omega_eigenvalues=lam, gamma=n / t_window, tau=tau)
    c = c_tau(m, lam, t_window)
    v = spec.factor_basis
    ones = np.ones(n)
    p1 = ones - v @ (v.T @ ones) if v.shape[1] else ones
    return c * np.trace(spec.omega) / n / float(p1 @ p1)


def mp_support(gamma: float, sigma2: float = 1.0) -> tuple[float, float]:
    """Marchenko-Pastur support edges for aspect ratio ``gamma``."""
    s = math.sqrt(gamma)
    return sigma2 * (1 - s) ** 2, sigma2 * (1 + s) ** 2
