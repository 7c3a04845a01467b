import numpy as np
import pytest

from ridgelet.cli import main
from ridgelet.config import load_config
from ridgelet.errors import ConfigError
from ridgelet.output import read_csv


def _ini(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_limits_prints_csv(tmp_path, capsys):
    cfg = _ini(tmp_path, "[limits]\ngammas = 0.5, 4, inf\ntaus = 1e-8\n")
    assert main(["limits", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("# seed=0 config_sha256=")
    assert out[1] == "gamma,tau,m,c,regime,rv_limit,status"
    assert len(out) == 5


def test_simulate_deterministic_and_manifested(tmp_path):
    cfg = _ini(tmp_path, "[experiment]\nn_list = 40\nt_list = 20\nmethods = ridgelet1, equal\n")
    for d in ("a", "b"):
        assert main(["simulate", "--config", str(cfg), "--reps", "1", "--seed", "9", "--out", str(tmp_path / d)]) == 0
    a = (tmp_path / "a" / "simulate.csv").read_bytes()
    assert a == (tmp_path / "b" / "simulate.csv").read_bytes()
    manifest, rows = read_csv(tmp_path / "a" / "simulate.csv")
    assert "seed=9" in manifest
    assert list(rows[0]) == ["setting", "dist", "N", "T", "method", "rr_mean", "rr_sd", "rv_mean", "reps", "seed", "failures"]


def test_threads_do_not_change_output(tmp_path):
    cfg = _ini(tmp_path, "[experiment]\nn_list = 30\nt_list = 15\nmethods = ridgelet1\n")
    main(["simulate", "--config", str(cfg), "--reps", "4", "--out", str(tmp_path / "a")])
    main(["simulate", "--config", str(cfg), "--reps", "4", "--threads", "2", "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "simulate.csv").read_bytes() == (tmp_path / "b" / "simulate.csv").read_bytes()


def test_flags_override_config(tmp_path):
    cfg = _ini(tmp_path, "[experiment]\nseed = 1\nreps = 7\ntau = 1e-6\n")
    c = load_config("simulate", cfg, seed=5, reps=None, tau=None)
    assert c.seed == 5 and c.reps == 7 and c.tau == 1e-6
    base = load_config("simulate", cfg).config_hash
    assert load_config("simulate", cfg, seed=5).config_hash != base
    assert load_config("simulate", cfg, out="elsewhere", threads=3).config_hash == base


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config("simulate", _ini(tmp_path, "[experiment]\nmethods = magic\n"))
    with pytest.raises(ConfigError):
        load_config("simulate", _ini(tmp_path, "[nonsense]\na = 1\n", "b.ini"))
    with pytest.raises(ConfigError):
        load_config("simulate", _ini(tmp_path, "[experiment]\nreps = 0\n", "c.ini"))
    with pytest.raises(ConfigError):
        load_config("simulate", _ini(tmp_path, "[experiment]\nreps = many\n", "d.ini"))


def test_exit_code_config_error(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "missing.ini")]) == 2
    bad = _ini(tmp_path, "[experiment]\nmethods = magic\n")
    assert main(["simulate", "--config", str(bad)]) == 2
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--seed", "notanint"])
    assert info.value.code == 2


def test_exit_code_data_error(tmp_path):
    cfg = _ini(tmp_path, f"[backtest]\nreturns = {tmp_path / 'nope.csv'}\n")
    assert main(["backtest", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3
    garbage = tmp_path / "g.csv"
    garbage.write_text("date,A\n2021-01-01,x\n")
    cfg2 = _ini(tmp_path, f"[backtest]\nreturns = {garbage}\n", "g.ini")
    assert main(["backtest", "--config", str(cfg2), "--out", str(tmp_path / "o")]) == 3


def test_exit_code_numerical_failure(tmp_path):
    cfg = _ini(tmp_path, "[experiment]\nsetting = 2\nn_list = 20\nt_list = 10\n"
                         "[dgp]\ndiag_range = 0.5, 0.5\npd_floor = 0.9\noffdiag_density = 1.0\n")
    assert main(["simulate", "--config", str(cfg), "--reps", "1", "--out", str(tmp_path / "o")]) == 4


def _toy_returns(tmp_path, constant=False):
    rng = np.random.default_rng(0)
    lines = ["date,A,B,C"]
    for m in (1, 2, 3):
        for d in range(1, 23):
            r = [0.01, 0.01, 0.01] if constant else rng.normal(0, 0.01, 3)
            lines.append(f"2021-{m:02d}-{d:02d}," + ",".join(repr(float(x)) for x in r))
    p = tmp_path / ("const.csv" if constant else "toy.csv")
    p.write_text("\n".join(lines) + "\n")
    return p


def test_backtest_toy_row_count(tmp_path):
    data = _toy_returns(tmp_path)
    cfg = _ini(tmp_path, f"[backtest]\nreturns = {data}\ntrain_window = 22\nmethods = ridgelet1, equal\n")
    assert main(["backtest", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    _, rows = read_csv(tmp_path / "o" / "results.csv")
    # Two rebalances (Feb, Mar) for two methods, plus one summary row per method.
    assert len(rows) == 2 * 2 + 2
    assert [r["month"] for r in rows[:2]] == ["2021-02", "2021-02"]


def test_backtest_constant_returns_zero_risk(tmp_path):
    data = _toy_returns(tmp_path, constant=True)
    cfg = _ini(tmp_path, f"[backtest]\nreturns = {data}\nmethods = equal\n")
    assert main(["backtest", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    _, rows = read_csv(tmp_path / "o" / "results.csv")
    summary = [r for r in rows if r["month"] == "ALL"][0]
    assert float(summary["annualized_risk"]) == 0.0


def test_poet_cv_returns_grid_member(tmp_path, capsys):
    cfg = _ini(tmp_path, "[experiment]\nsetting = 2\nn_list = 60\nt_list = 60\n[poet]\ngrid = 0.25, 0.5, 1, 2, 4\n")
    assert main(["poet-cv", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    chosen = float(capsys.readouterr().out.strip().split("=")[1])
    assert chosen in (0.25, 0.5, 1.0, 2.0, 4.0)
    _, rows = read_csv(tmp_path / "o" / "poet_cv.csv")
    assert sum(r["selected"] == "true" for r in rows) == 1


def test_sweep_command(tmp_path):
    cfg = _ini(tmp_path, "[experiment]\nn_list = 10:30:10\nt_list = 15\nmethods = ridgelet1\n")
    assert main(["sweep", "--config", str(cfg), "--reps", "2", "--out", str(tmp_path / "o")]) == 0
    _, rows = read_csv(tmp_path / "o" / "sweep.csv")
    assert [r["value"] for r in rows] == ["10", "20", "30"]
