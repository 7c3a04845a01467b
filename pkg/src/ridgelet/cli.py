"""``ridgelet`` command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from ridgelet import experiments as exp
from ridgelet.backtest import BacktestConfig, run_backtest, write_backtest
from ridgelet.config import ConfigError, ExperimentConfig, limits_grid, load_config
from ridgelet.covariance import poet_cv_c1
from ridgelet.dgp import sample_returns
from ridgelet.errors import DataError, InvalidInput, NumericalError
from ridgelet.output import write_csv
from ridgelet.panel import as_matrix, load_returns_csv

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERICAL = 0, 2, 3, 4

log = logging.getLogger("ridgelet")


def _job(cfg: ExperimentConfig, t: int, diagnostics: bool = False) -> exp.ReplicationJob:
    return exp.ReplicationJob(t, cfg.methods, cfg.dist, cfg.tau, cfg.demean, cfg.poet, diagnostics)


def cmd_simulate(cfg: ExperimentConfig) -> list[dict]:
    rows, detail = exp.simulate_table(
        cfg.spec_factory(), cfg.n_list, cfg.t_list, _job(cfg, cfg.t_list[0]), cfg.reps, cfg.seed, cfg.threads
    )
    write_csv(cfg.out / "simulate.csv", exp.SIMULATE_COLUMNS, rows, cfg.seed, cfg.config_hash)
    write_csv(cfg.out / "replications.csv", exp.REPLICATION_COLUMNS, list(detail), cfg.seed, cfg.config_hash)
    for r in rows:
        print(f"N={r['N']} T={r['T']} {r['method']}: rr_mean={r['rr_mean']:.4f} "
              f"rr_sd={r['rr_sd']:.4f} failures={r['failures']}")
    return rows


def cmd_sweep(cfg: ExperimentConfig) -> list[dict]:
    var, values, fixed = cfg.resolved_sweep()
    rows = exp.sweep_table(cfg.spec_factory(), var, values, fixed, _job(cfg, fixed), cfg.reps, cfg.seed, cfg.threads)
    write_csv(cfg.out / "sweep.csv", exp.SWEEP_COLUMNS, rows, cfg.seed, cfg.config_hash)
    print(f"wrote {len(rows)} rows to {cfg.out / 'sweep.csv'}")
    return rows


def cmd_limits(cfg: ExperimentConfig) -> list[dict]:
    gammas, taus, n, sigma2, omega = limits_grid(cfg.limits)
    eigs = None
    if omega == "dgp":
        eigs = np.linalg.eigvalsh(cfg.spec_factory()(n).omega)
    rows = exp.limits_table(gammas, taus, n=n, omega_eigenvalues=eigs, sigma2=sigma2)
    path = write_csv(cfg.out / "limits.csv", exp.LIMITS_COLUMNS, rows, cfg.seed, cfg.config_hash)
    sys.stdout.write(path.read_text())
    return rows


def _load_panel(path):
    try:
        return load_returns_csv(path)
    except OSError as exc:
        raise DataError(f"cannot read returns file {path}: {exc}") from None


def _universe(value: str | None):
    if not value:
        return None
    p = Path(value)
    if p.is_file():
        ids = [line.strip() for line in p.read_text().splitlines()]
    else:
        ids = value.split(",")
    ids = tuple(i.strip() for i in ids if i.strip() and not i.startswith("#"))
    if not ids:
        raise ConfigError("universe is empty")
    return ids


def backtest_config(cfg: ExperimentConfig) -> tuple[Path, BacktestConfig]:
    sec = cfg.backtest
    if "returns" not in sec:
        raise ConfigError("[backtest] needs a 'returns' CSV path")
    kwargs = {}
    try:
        if "train_window" in sec:
            kwargs["train_window"] = int(sec["train_window"])
        if "min_fraction" in sec:
            kwargs["min_fraction"] = float(sec["min_fraction"])
        if "demean" in sec:
            kwargs["demean"] = sec["demean"].strip().lower() in ("1", "true", "yes", "on")
    except ValueError as exc:
        raise ConfigError(f"invalid [backtest] value: {exc}") from None
    for key in ("eligibility", "fill"):
        if key in sec:
            kwargs[key] = sec[key].strip()
    if "methods" in sec:
        kwargs["methods"] = tuple(m.strip() for m in sec["methods"].split(",") if m.strip())
    try:
        bt = BacktestConfig(tau=cfg.tau, poet=cfg.poet, universe=_universe(sec.get("universe")), **kwargs)
    except InvalidInput as exc:
        raise ConfigError(str(exc)) from None
    return Path(sec["returns"]), bt


def cmd_backtest(cfg: ExperimentConfig):
    path, bt = backtest_config(cfg)
    panel = _load_panel(path)
    result = run_backtest(panel, bt)
    echo = {"backtest": cfg.backtest, "tau": cfg.tau, "poet": vars(cfg.poet) | {"grid": list(cfg.poet.grid)}}
    write_backtest(result, cfg.out, cfg.seed, cfg.config_hash, echo)
    for m, risk in result.annualized.items():
        print(f"{m}: annualized_risk={risk:.4f}")
    if result.failures:
        print(f"{len(result.failures)} method-months failed; see {cfg.out / 'manifest.json'}")
    return result


def cmd_poet_cv(cfg: ExperimentConfig) -> float:
    if cfg.poet_returns is not None:
        panel = _load_panel(cfg.poet_returns)
        keep = np.flatnonzero(~np.isnan(panel.values).any(axis=1))
        if keep.size == 0:
            raise DataError("no asset has a complete history")
        x = as_matrix(panel.subset(assets=keep))
    else:
        spec = cfg.spec_factory()(cfg.n_list[0])
        x = sample_returns(spec, cfg.t_list[0], dist=cfg.dist, seed=cfg.seed).values
    p = cfg.poet
    c1, scores = poet_cv_c1(x, grid=p.grid, folds=p.folds, tau=cfg.tau, r_max=p.r_max, r=p.r,
                            demean=cfg.demean, return_scores=True)
    rows = [dict(c1=g, cv_score=s, selected=bool(g == c1)) for g, s in zip(p.grid, scores)]
    write_csv(cfg.out / "poet_cv.csv", ("c1", "cv_score", "selected"), rows, cfg.seed, cfg.config_hash)
    print(f"selected c1={c1!r}")
    return c1


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "limits": cmd_limits,
    "backtest": cmd_backtest,
    "poet-cv": cmd_poet_cv,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI config file")
    common.add_argument("--seed", type=int, help="base seed; replication i uses seed + i")
    common.add_argument("--tau", type=float, help="ridge size (default 1e-8)")
    common.add_argument("--reps", type=int, help="number of replications")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--threads", type=int, help="worker processes for replications")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ridgelet", description="High-dimensional minimum-variance portfolios")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "Monte Carlo relative risk tables",
        "sweep": "risk curves along N or T",
        "limits": "theoretical limits over a (gamma, tau) grid",
        "backtest": "rolling monthly backtest on a returns CSV",
        "poet-cv": "cross-validate the POET threshold constant",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    # argparse exits with status 2 on bad arguments, which already matches the
    # configuration-error code.
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.command, args.config, seed=args.seed, tau=args.tau, reps=args.reps,
                          out=args.out, threads=args.threads)
        COMMANDS[args.command](cfg)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (InvalidInput, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
