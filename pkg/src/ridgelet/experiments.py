"""Monte Carlo harness: replications, risk-curve sweeps and theory tables."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ridgelet import rmt
from ridgelet.covariance import DEFAULT_TAU
from ridgelet.dgp import FactorModelSpec, sample_returns
from ridgelet.errors import InvalidInput, RidgeletError
from ridgelet.methods import MethodSuite, PoetOptions, check_methods
from ridgelet.risk import in_sample_variance, relative_risk, relative_variance


@dataclass
class ReplicationResult:
    index: int
    seed: int
    rv: dict[str, float]
    insample: dict[str, float]
    oos_variance: dict[str, float]
    errors: dict[str, str] = field(default_factory=dict)
    diagnostics: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ReplicationJob:
    t: int
    methods: tuple[str, ...]
    dist: str = "gaussian"
    tau: float = DEFAULT_TAU
    demean: bool = False
    poet: PoetOptions = field(default_factory=PoetOptions)
    diagnostics: bool = False


def _omega_diagnostics(suite: MethodSuite, spec: FactorModelSpec) -> dict[str, float]:
    """Scale ``b = tr(omega_hat^{-1} omega) / N`` and the spectral gap ``||omega - b omega_hat||``."""
    omega, omega_hat = spec.omega, suite.omega_hat
    n = omega.shape[0]
    b = float(np.trace(np.linalg.solve(omega_hat, omega)) / n)
    gap = float(np.linalg.norm(omega - b * omega_hat, 2))
    return {"b": b, "omega_gap": gap, "r_hat": float(suite.poet_result.r_hat), "c1": suite.poet_result.threshold_constant}


def run_replication(spec: FactorModelSpec, job: ReplicationJob, index: int, seed: int) -> ReplicationResult:
    panel = sample_returns(spec, job.t, dist=job.dist, seed=seed)
    suite = MethodSuite(panel.values, tau=job.tau, demean=job.demean, spec=spec, poet=job.poet)
    out = ReplicationResult(index, seed, {}, {}, {})
    for m in job.methods:
        try:
            w = suite.weight(m)
            oos = float(w.weights @ spec.sigma @ w.weights)
            out.rv[m] = relative_variance(w, spec.sigma, spec.precision_sum)
            out.oos_variance[m] = oos
            out.insample[m] = in_sample_variance(w, panel.values, job.demean)
        except RidgeletError as exc:
            out.errors[m] = f"{type(exc).__name__}: {exc}"
    if job.diagnostics:
        try:
            out.diagnostics = _omega_diagnostics(suite, spec)
        except RidgeletError as exc:
            out.errors["diagnostics"] = f"{type(exc).__name__}: {exc}"
    return out


_WORKER: dict = {}


def _init_worker(spec, job):
    _WORKER["spec"], _WORKER["job"] = spec, job


def _work(args):
    index, seed = args
    return run_replication(_WORKER["spec"], _WORKER["job"], index, seed)


def run_replications(spec: FactorModelSpec, job: ReplicationJob, reps: int, seed: int = 0, threads: int = 1):
    """Replication ``i`` draws its returns with seed ``seed + i``; output order is by ``i``."""
    if reps < 1:
        raise InvalidInput("reps must be at least 1")
    check_methods(job.methods, population_known=True)
    # Warm the population caches once so workers inherit them.
    spec.sigma_sqrt, spec.precision_sum, spec.factor_basis
    tasks = [(i, seed + i) for i in range(reps)]
    if threads <= 1 or reps == 1:
        return [run_replication(spec, job, i, s) for i, s in tasks]
    with ProcessPoolExecutor(max_workers=threads, initializer=_init_worker, initargs=(spec, job)) as pool:
        results = list(pool.map(_work, tasks, chunksize=max(1, reps // (4 * threads))))
    return sorted(results, key=lambda r: r.index)


def _finite(values):
    return np.asarray([v for v in values if math.isfinite(v)], dtype=float)


def summarize(results: list[ReplicationResult], methods) -> dict[str, dict]:
    out = {}
    for m in methods:
        rv = _finite(r.rv[m] for r in results if m in r.rv)
        rr = np.sqrt(rv) - 1.0 if rv.size else rv
        out[m] = dict(
            rr_mean=float(rr.mean()) if rr.size else float("nan"),
            rr_sd=float(rr.std(ddof=1)) if rr.size > 1 else float("nan"),
            rv_mean=float(rv.mean()) if rv.size else float("nan"),
            reps=int(rv.size),
            failures=len(results) - int(rv.size),
        )
    return out


SIMULATE_COLUMNS = ("setting", "dist", "N", "T", "method", "rr_mean", "rr_sd", "rv_mean", "reps", "seed", "failures")
SWEEP_COLUMNS = ("sweep_var", "value", "method", "oos_risk_mean", "insample_risk_mean", "oracle_risk", "reps", "failures")
LIMITS_COLUMNS = ("gamma", "tau", "m", "c", "regime", "rv_limit", "status")
REPLICATION_COLUMNS = ("N", "T", "replication", "seed", "method", "rv", "rr", "insample_variance", "error")


def simulate_table(spec_factory, n_list, t_list, job: ReplicationJob, reps: int, seed: int, threads: int = 1):
    """Summary rows and per-replication rows for every ``(N, T)`` pair.

    ``spec_factory(n)`` builds the population model for ``n`` assets.
    """
    rows, detail = [], []
    for n in n_list:
        spec = spec_factory(n)
        for t in t_list:
            results = run_replications(spec, _with_t(job, t), reps, seed, threads)
            for m, s in summarize(results, job.methods).items():
                rows.append(dict(setting=spec.setting, dist=job.dist, N=n, T=t, method=m, seed=seed, **s))
            detail.extend(_detail_rows(n, t, results, job.methods))
    return rows, detail


def _with_t(job: ReplicationJob, t: int) -> ReplicationJob:
    return ReplicationJob(t, job.methods, job.dist, job.tau, job.demean, job.poet, job.diagnostics)


def _detail_rows(n, t, results, methods):
    for r in results:
        for m in methods:
            rv = r.rv.get(m, float("nan"))
            yield dict(
                N=n, T=t, replication=r.index, seed=r.seed, method=m, rv=rv,
                rr=relative_risk(rv) if math.isfinite(rv) else float("nan"),
                insample_variance=r.insample.get(m, float("nan")), error=r.errors.get(m, ""),
            )


def sweep_table(spec_factory, sweep_var: str, values, fixed: int, job: ReplicationJob, reps: int, seed: int, threads: int = 1):
    """Risk curves along ``N`` (with ``T = fixed``) or along ``T`` (with ``N = fixed``).

    Risks are variances averaged over replications: ``w' Sigma w`` out of
    sample, ``w' S0 w`` in sample, and ``1 / (1' Sigma^{-1} 1)`` for the oracle.
    """
    if sweep_var not in ("N", "T"):
        raise InvalidInput("sweep_var must be 'N' or 'T'")
    values = list(values)
    if len(values) < 3:
        raise InvalidInput("a sweep needs at least 3 grid points")
    rows = []
    spec = None if sweep_var == "N" else spec_factory(fixed)
    for v in values:
        if sweep_var == "N":
            spec, t = spec_factory(v), fixed
        else:
            t = v
        results = run_replications(spec, _with_t(job, t), reps, seed, threads)
        oracle = 1.0 / spec.precision_sum
        for m in job.methods:
            ok = [r for r in results if m in r.oos_variance]
            oos = _finite(r.oos_variance[m] for r in ok)
            ins = _finite(r.insample[m] for r in ok)
            rows.append(dict(
                sweep_var=sweep_var, value=v, method=m,
                oos_risk_mean=float(oos.mean()) if oos.size else float("nan"),
                insample_risk_mean=float(ins.mean()) if ins.size else float("nan"),
                oracle_risk=oracle, reps=int(oos.size), failures=len(results) - int(oos.size),
            ))
    return rows


def regime_of(gamma: float) -> str:
    if math.isinf(gamma):
        return "infinite"
    return "under" if gamma < 1 else "over_identity"


def limits_table(gammas, taus, n: int = 400, omega_eigenvalues=None, sigma2: float = 1.0):
    """Theory rows over a ``(gamma, tau)`` grid.

    ``omega_eigenvalues`` defaults to ``sigma2`` repeated ``n`` times. Rows
    whose limit does not exist or whose solver fails are flagged in
    ``status`` rather than raised.
    """
    lam = np.full(n, sigma2) if omega_eigenvalues is None else np.asarray(omega_eigenvalues, dtype=float)
    rows = []
    for gamma in gammas:
        gamma = float(gamma)
        regime = regime_of(gamma)
        for tau in taus:
            row = dict(gamma=gamma, tau=float(tau), m=float("nan"), c=float("nan"), regime=regime,
                       rv_limit=float("nan"), status="ok")
            try:
                row["rv_limit"] = rmt.rv_limit(regime, None if regime == "infinite" else gamma)
                if regime != "infinite":
                    m = rmt.stieltjes_m(omega_eigenvalues=lam, gamma=gamma, tau=float(tau))
                    row["m"] = m
                    row["c"] = rmt.c_tau(m, lam, lam.size / gamma)
            except RidgeletError as exc:
                row["status"] = type(exc).__name__
            rows.append(row)
    return rows
