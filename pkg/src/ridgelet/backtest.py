"""Rolling monthly out-of-sample backtests.

At the first trading day of each calendar month, weights are estimated on
the preceding ``train_window`` trading days and held fixed through the
month. Daily portfolio returns are recorded on the eligible universe.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ridgelet.covariance import DEFAULT_TAU
from ridgelet.errors import InvalidInput, NoEligibleAssets, RidgeletError
from ridgelet.methods import MethodSuite, PoetOptions, check_methods
from ridgelet.panel import ReturnPanel
from ridgelet.risk import annualized_risk

log = logging.getLogger(__name__)

ELIGIBILITY_RULES = ("complete", "min_fraction")
FILL_POLICIES = ("zero_fill", "mean_fill", "drop_day")


@dataclass
class BacktestConfig:
    train_window: int = 22
    methods: tuple[str, ...] = ("ridgelet1", "ridgelet2", "ls", "equal", "ridgeless")
    eligibility: str = "complete"
    min_fraction: float = 0.75
    fill: str = "zero_fill"
    tau: float = DEFAULT_TAU
    demean: bool = True
    universe: tuple[str, ...] | None = None
    poet: PoetOptions = field(default_factory=PoetOptions)

    def __post_init__(self):
        if self.train_window < 2:
            raise InvalidInput("train_window must be at least 2")
        if not 0 < self.min_fraction <= 1:
            raise InvalidInput("min_fraction must be in (0, 1]")
        if self.eligibility not in ELIGIBILITY_RULES:
            raise InvalidInput(f"eligibility must be one of {ELIGIBILITY_RULES}")
        if self.fill not in FILL_POLICIES:
            raise InvalidInput(f"fill must be one of {FILL_POLICIES}")
        self.methods = check_methods(self.methods, population_known=False)


class RebalanceWindow(NamedTuple):
    month: str
    train: slice
    test: slice


def _month_starts(dates) -> tuple[np.ndarray, np.ndarray]:
    months = np.asarray(dates, dtype="datetime64[D]").astype("datetime64[M]")
    if months.size == 0:
        return np.empty(0, dtype=int), months
    starts = np.flatnonzero(np.r_[True, months[1:] != months[:-1]])
    return starts, months


def _schedule(dates, train_window: int):
    starts, months = _month_starts(dates)
    ends = np.r_[starts[1:], len(months)]
    entries, skipped = [], []
    for s, e in zip(starts, ends):
        label = str(months[s])
        if s >= train_window:
            entries.append(RebalanceWindow(label, slice(s - train_window, s), slice(s, e)))
        else:
            skipped.append(label)
    return entries, skipped


def rebalance_schedule(dates, train_window: int) -> list[RebalanceWindow]:
    """Monthly (train, test) index slices; months without enough history are skipped."""
    entries, skipped = _schedule(dates, train_window)
    for month in skipped:
        log.warning("skipping %s: fewer than %d prior trading days", month, train_window)
    return entries


def lookahead_violations(dates, windows) -> list[str]:
    """Months whose training slice reaches the first day of the test slice or later."""
    dates = np.asarray(dates, dtype="datetime64[D]")
    bad = []
    for win in windows:
        train, test = dates[win.train], dates[win.test]
        if train.size == 0 or test.size == 0 or not train.max() < test.min():
            bad.append(win.month)
    return bad


def eligible_assets(panel: ReturnPanel, window: slice, rule: str = "complete", min_fraction: float = 0.75) -> np.ndarray:
    """Row indices of assets with enough observed returns inside ``window``."""
    observed = ~np.isnan(panel.values[:, window])
    if observed.shape[1] == 0:
        raise InvalidInput("empty training window")
    if rule == "complete":
        ok = observed.all(axis=1)
    elif rule == "min_fraction":
        ok = observed.mean(axis=1) >= min_fraction
    else:
        raise InvalidInput(f"unknown eligibility rule {rule!r}")
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        raise NoEligibleAssets(f"no asset satisfies rule {rule!r} in window {window}")
    return idx


def training_matrix(panel: ReturnPanel, assets: np.ndarray, window: slice, fill: str = "zero_fill") -> np.ndarray:
    x = panel.values[assets, window].copy()
    miss = np.isnan(x)
    if not miss.any():
        return x
    if fill == "zero_fill":
        x[miss] = 0.0
    elif fill == "mean_fill":
        means = np.nanmean(x, axis=1)
        x[miss] = np.take(means, np.nonzero(miss)[0])
    elif fill == "drop_day":
        x = x[:, ~miss.any(axis=0)]
        if x.shape[1] < 2:
            raise NoEligibleAssets("fewer than two complete days after dropping")
    else:
        raise InvalidInput(f"unknown fill policy {fill!r}")
    return x


@dataclass
class BacktestResult:
    dates: np.ndarray
    returns: dict[str, np.ndarray]
    annualized: dict[str, float]
    windows: list[RebalanceWindow]
    universe_sizes: list[tuple[str, int]]
    weights: list[tuple[str, str, tuple[str, ...], np.ndarray]]
    failures: list[tuple[str, str, str]]
    skipped_months: list[str]

    def monthly_rows(self) -> list[dict]:
        rows = []
        sizes = dict(self.universe_sizes)
        failed = {(m, meth) for m, meth, _ in self.failures}
        pos = 0
        for win in self.windows:
            n_days = win.test.stop - win.test.start
            for method, series in self.returns.items():
                chunk = series[pos : pos + n_days]
                status = "failed" if (win.month, method) in failed else "ok"
                sd = float(np.std(chunk, ddof=1)) if status == "ok" and n_days >= 2 else float("nan")
                rows.append(
                    dict(month=win.month, method=method, universe_size=sizes.get(win.month, 0),
                         n_days=n_days, realized_sd=sd, annualized_risk=float("nan"), status=status)
                )
            pos += n_days
        for method, series in self.returns.items():
            ok = series[~np.isnan(series)]
            rows.append(
                dict(month="ALL", method=method, universe_size="", n_days=int(ok.size),
                     realized_sd=float(np.std(ok, ddof=1)) if ok.size >= 2 else float("nan"),
                     annualized_risk=self.annualized[method],
                     status=f"{sum(1 for _, m, _ in self.failures if m == method)} failed months")
            )
        return rows


def run_backtest(panel: ReturnPanel, config: BacktestConfig) -> BacktestResult:
    if config.universe is not None:
        keep = [i for i, a in enumerate(panel.asset_ids) if a in set(config.universe)]
        if not keep:
            raise NoEligibleAssets("none of the configured universe is in the panel")
        panel = panel.subset(assets=keep)
    windows, skipped = _schedule(panel.dates, config.train_window)
    for month in skipped:
        log.warning("skipping %s: fewer than %d prior trading days", month, config.train_window)
    if not windows:
        raise InvalidInput("rebalance schedule is empty: not enough history")

    series = {m: [] for m in config.methods}
    dates, sizes, snapshots, failures = [], [], [], []
    leaks = lookahead_violations(panel.dates, windows)
    if leaks:
        raise AssertionError(f"training data overlaps the test month in {leaks}")
    for win in windows:
        test_dates = panel.dates[win.test]
        dates.append(test_dates)
        n_days = len(test_dates)
        try:
            assets = eligible_assets(panel, win.train, config.eligibility, config.min_fraction)
            x = training_matrix(panel, assets, win.train, config.fill)
        except RidgeletError as exc:
            sizes.append((win.month, 0))
            for m in config.methods:
                series[m].append(np.full(n_days, np.nan))
                failures.append((win.month, m, str(exc)))
            continue
        sizes.append((win.month, int(assets.size)))
        test = np.nan_to_num(panel.values[assets, win.test], nan=0.0)
        suite = MethodSuite(x, tau=config.tau, demean=config.demean, poet=config.poet)
        ids = tuple(panel.asset_ids[i] for i in assets)
        for m in config.methods:
            try:
                w = suite.weight(m).weights
            except RidgeletError as exc:
                series[m].append(np.full(n_days, np.nan))
                failures.append((win.month, m, f"{type(exc).__name__}: {exc}"))
                continue
            snapshots.append((win.month, m, ids, w))
            # Correctly rounded daily sums: a BLAS product may round a day
            # differently depending on its position in the block.
            series[m].append(np.array([math.fsum(w * test[:, j]) for j in range(n_days)]))

    returns = {m: np.concatenate(v) for m, v in series.items()}
    annualized = {}
    for m, r in returns.items():
        ok = r[~np.isnan(r)]
        annualized[m] = annualized_risk(ok) if ok.size >= 2 else float("nan")
    return BacktestResult(
        dates=np.concatenate(dates),
        returns=returns,
        annualized=annualized,
        windows=windows,
        universe_sizes=sizes,
        weights=snapshots,
        failures=failures,
        skipped_months=skipped,
    )


RESULT_COLUMNS = ("month", "method", "universe_size", "n_days", "realized_sd", "annualized_risk", "status")


def write_backtest(result: BacktestResult, out, seed: int, config_hash: str, echo: dict | None = None) -> Path:
    """Write ``results.csv``, ``oos_returns.csv``, weight snapshots and ``manifest.json`` under ``out``."""
    from ridgelet import __version__
    from ridgelet.output import write_csv, write_json

    out = Path(out)
    write_csv(out / "results.csv", RESULT_COLUMNS, result.monthly_rows(), seed, config_hash)
    methods = list(result.returns)
    daily = [
        {"date": str(d), **{m: result.returns[m][i] for m in methods}}
        for i, d in enumerate(result.dates)
    ]
    write_csv(out / "oos_returns.csv", ["date", *methods], daily, seed, config_hash)
    for month, method, ids, w in result.weights:
        rows = [{"asset": a, "weight": x} for a, x in zip(ids, w)]
        write_csv(out / "weights" / f"{month}_{method}.csv", ("asset", "weight"), rows, seed, config_hash)
    write_json(out / "manifest.json", {
        "version": __version__,
        "seed": seed,
        "config_sha256": config_hash,
        "config": echo or {},
        "skipped_months": result.skipped_months,
        "failures": [{"month": m, "method": meth, "error": e} for m, meth, e in result.failures],
    })
    return out
