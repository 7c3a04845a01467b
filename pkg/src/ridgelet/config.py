"""Sectioned INI configuration for the command-line runs.

Precedence, lowest to highest: built-in defaults, the config file, command
line flags. Flags are written into the ``[experiment]`` section before
anything is parsed, so the config hash always describes the effective run.

Example::

    [experiment]
    setting = 2
    n_list = 100, 200, 400
    t_list = 44
    methods = ridgelet1, ridgelet2, equal
    reps = 100
    seed = 7

    [dgp]
    r = 1
    offdiag_density = 0.02

    [poet]
    c1 = cv
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ridgelet.covariance import DEFAULT_C1_GRID, DEFAULT_R_MAX, DEFAULT_TAU
from ridgelet.dgp import DISTRIBUTIONS, spec_from_config
from ridgelet.errors import ConfigError
from ridgelet.methods import AVAILABLE, PoetOptions

MODES = ("simulate", "sweep", "limits", "backtest", "poet-cv")
SECTIONS = ("experiment", "dgp", "poet", "backtest", "limits")
# Keys that change where or how fast a run happens but not what it computes.
UNHASHED = {("experiment", "out"), ("experiment", "threads")}


def _ints(text: str) -> tuple[int, ...]:
    text = text.strip()
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ConfigError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = parts
        return tuple(range(start, stop + 1, step))
    return tuple(int(p) for p in text.split(",") if p.strip())


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(",") if p.strip())


def _words(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


@dataclass
class ExperimentConfig:
    mode: str
    setting: int = 1
    dist: str = "gaussian"
    n_list: tuple[int, ...] = (300,)
    t_list: tuple[int, ...] = (600,)
    methods: tuple[str, ...] = ("ridgelet1", "equal", "oracle")
    reps: int = 100
    seed: int = 0
    tau: float = DEFAULT_TAU
    demean: bool = False
    threads: int = 1
    out: Path = Path("results")
    sweep_var: str | None = None
    dgp: dict = field(default_factory=dict)
    poet: PoetOptions = field(default_factory=PoetOptions)
    poet_returns: Path | None = None
    backtest: dict = field(default_factory=dict)
    limits: dict = field(default_factory=dict)
    config_hash: str = ""

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if not self.tau > 0:
            raise ConfigError("tau must be positive")
        if self.dist not in DISTRIBUTIONS:
            raise ConfigError(f"dist must be one of {DISTRIBUTIONS}")
        if self.setting not in (1, 2):
            raise ConfigError("setting must be 1 or 2")
        unknown = [m for m in self.methods if m not in AVAILABLE]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}; available: {', '.join(AVAILABLE)}")
        if not self.n_list or not self.t_list:
            raise ConfigError("n_list and t_list must be non-empty")

    def spec_factory(self):
        """Callable ``n -> FactorModelSpec`` from the ``[dgp]`` section."""
        base = dict(self.dgp)
        base.setdefault("seed", str(self.seed))
        base["setting"] = str(self.setting)

        def build(n: int):
            return spec_from_config({**base, "n": str(n)})

        return build

    def resolved_sweep(self) -> tuple[str, tuple[int, ...], int]:
        if self.sweep_var is not None:
            var = self.sweep_var
        elif len(self.n_list) >= 3:
            var = "N"
        elif len(self.t_list) >= 3:
            var = "T"
        else:
            raise ConfigError("a sweep needs n_list or t_list with at least 3 points")
        if var == "N":
            values, fixed = self.n_list, self.t_list
        elif var == "T":
            values, fixed = self.t_list, self.n_list
        else:
            raise ConfigError("sweep_var must be N or T")
        if len(values) < 3:
            raise ConfigError(f"sweep over {var} needs at least 3 points")
        if len(fixed) != 1:
            raise ConfigError("the non-swept dimension must have exactly one value")
        return var, values, fixed[0]


def read_parser(path: str | Path | None) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {p} does not exist")
        try:
            cp.read(p)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {p}: {exc}") from None
    for name in cp.sections():
        if name not in SECTIONS:
            raise ConfigError(f"unknown config section [{name}]; expected {SECTIONS}")
    for name in SECTIONS:
        if not cp.has_section(name):
            cp.add_section(name)
    return cp


def apply_overrides(cp: configparser.ConfigParser, **flags) -> None:
    for key, value in flags.items():
        if value is not None:
            cp["experiment"][key] = str(value)


def config_hash(cp: configparser.ConfigParser, mode: str = "") -> str:
    """sha256 over the mode and sorted ``section.key=value`` lines, excluding run-location keys."""
    lines = [f"mode={mode}"]
    for section in sorted(cp.sections()):
        for key in sorted(cp[section]):
            if (section, key) not in UNHASHED:
                lines.append(f"{section}.{key}={cp[section][key].strip()}")
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()


def _poet_options(sec) -> PoetOptions:
    c1_text = sec.get("c1", "cv").strip()
    c1 = "cv" if c1_text == "cv" else float(c1_text)
    if "grid" in sec:
        grid = _floats(sec["grid"])
    elif any(k in sec for k in ("grid_min", "grid_max", "grid_size")):
        grid = tuple(np.geomspace(float(sec.get("grid_min", "0.1")), float(sec.get("grid_max", "10")),
                                  int(sec.get("grid_size", "21"))))
    else:
        grid = tuple(DEFAULT_C1_GRID)
    r_text = sec.get("r")
    return PoetOptions(
        r_max=int(sec.get("r_max", str(DEFAULT_R_MAX))),
        c1=c1,
        grid=grid,
        folds=int(sec.get("folds", "5")),
        r=None if r_text in (None, "", "auto") else int(r_text),
    )


def parse_config(mode: str, cp: configparser.ConfigParser) -> ExperimentConfig:
    ex = cp["experiment"]
    try:
        kwargs = dict(
            mode=mode,
            setting=int(ex.get("setting", "1")),
            dist=ex.get("dist", "gaussian").strip(),
            reps=int(ex.get("reps", "100")),
            seed=int(ex.get("seed", "0")),
            tau=float(ex.get("tau", repr(DEFAULT_TAU))),
            demean=_bool(ex.get("demean", "false")),
            threads=int(ex.get("threads", "1")),
            out=Path(ex.get("out", "results")),
            sweep_var=ex.get("sweep_var"),
            dgp=dict(cp["dgp"]),
            poet=_poet_options(cp["poet"]),
            poet_returns=Path(cp["poet"]["returns"]) if "returns" in cp["poet"] else None,
            backtest=dict(cp["backtest"]),
            limits=dict(cp["limits"]),
            config_hash=config_hash(cp, mode),
        )
        if "n_list" in ex:
            kwargs["n_list"] = _ints(ex["n_list"])
        if "t_list" in ex:
            kwargs["t_list"] = _ints(ex["t_list"])
        if "methods" in ex:
            kwargs["methods"] = _words(ex["methods"])
    except ValueError as exc:
        raise ConfigError(f"invalid config value: {exc}") from None
    return ExperimentConfig(**kwargs)


def load_config(mode: str, path=None, **flags) -> ExperimentConfig:
    cp = read_parser(path)
    apply_overrides(cp, **flags)
    return parse_config(mode, cp)


def limits_grid(limits: dict) -> tuple[tuple[float, ...], tuple[float, ...], int, float, str]:
    try:
        gammas = tuple(math.inf if g.strip() == "inf" else float(g) for g in
                       limits.get("gammas", "0.1, 0.5, 2, 10").split(",") if g.strip())
        taus = _floats(limits.get("taus", "1e-8, 1e-4, 1e-2"))
        n = int(limits.get("n", "400"))
        sigma2 = float(limits.get("sigma2", "1.0"))
    except ValueError as exc:
        raise ConfigError(f"invalid [limits] value: {exc}") from None
    omega = limits.get("omega", "identity").strip()
    if omega not in ("identity", "dgp"):
        raise ConfigError("[limits] omega must be 'identity' or 'dgp'")
    if not gammas or not taus:
        raise ConfigError("[limits] gammas and taus must be non-empty")
    return gammas, taus, n, sigma2, omega
