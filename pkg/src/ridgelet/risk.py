"""Portfolio risk evaluation."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ridgelet.errors import InvalidInput
from ridgelet.linalg import as_symmetric, spd_solve
from ridgelet.panel import as_matrix

TRADING_DAYS = 252


def _w(w) -> np.ndarray:
    return np.asarray(getattr(w, "weights", w), dtype=float)


def quadratic_form(w, m) -> float:
    w = _w(w)
    m = as_symmetric(m)
    if m.shape[0] != w.size:
        raise InvalidInput(f"weight length {w.size} does not match matrix dimension {m.shape[0]}")
    return float(w @ (m @ w))


def oracle_precision_sum(sigma) -> float:
    """``1^T Sigma^{-1} 1``, the reciprocal of the oracle variance."""
    sigma = as_symmetric(sigma)
    return float(spd_solve(sigma, np.ones(sigma.shape[0])).sum())


def relative_variance(w, sigma, precision_sum: float | None = None) -> float:
    """``w^T Sigma w * 1^T Sigma^{-1} 1``; ``precision_sum`` skips the solve when known."""
    if precision_sum is None:
        precision_sum = oracle_precision_sum(sigma)
    return quadratic_form(w, sigma) * precision_sum


def relative_risk(rv: float) -> float:
    if rv < 0:
        raise InvalidInput("relative variance must be non-negative")
    return math.sqrt(rv) - 1.0


def in_sample_variance(w, panel, demean: bool = False) -> float:
    """``w^T S0 w`` evaluated as ``||R^T w||^2 / T`` so it is never negative."""
    r = as_matrix(panel)
    p = _w(w) @ r
    if demean:
        p = p - p.mean()
    return float(p @ p / r.shape[1])


def annualized_risk(daily_returns, periods: int = TRADING_DAYS) -> float:
    """Sample standard deviation (ddof=1) scaled by ``sqrt(periods)``."""
    x = np.asarray(daily_returns, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise InvalidInput("need at least two returns")
    if np.all(x == x[0]):
        # np.std can leave rounding residue on a constant series.
        return 0.0
    return float(np.std(x, ddof=1) * math.sqrt(periods))


@dataclass
class RiskReport:
    method: str
    n_assets: int
    t_window: int
    in_sample_variance: float
    oos_variance: float | None = None
    relative_variance: float | None = None
    relative_risk: float | None = None
    annualized_risk: float | None = None

    def to_row(self) -> dict:
        return asdict(self)


def risk_report(w, panel, sigma=None, precision_sum=None, demean: bool = False) -> RiskReport:
    """In-sample and (when ``sigma`` is known) out-of-sample risk of one weight vector."""
    r = as_matrix(panel)
    report = RiskReport(
        method=getattr(w, "method", "unknown"),
        n_assets=r.shape[0],
        t_window=r.shape[1],
        in_sample_variance=in_sample_variance(w, r, demean),
    )
    if sigma is not None:
        if precision_sum is None:
            precision_sum = oracle_precision_sum(sigma)
        report.oos_variance = quadratic_form(w, sigma)
        report.relative_variance = report.oos_variance * precision_sum
        report.relative_risk = relative_risk(max(report.relative_variance, 0.0))
    return report
