"""Population factor models used as simulation ground truth.

Setting 1 is ``Sigma = B B^T + sigma2 I``; Setting 2 replaces the
homoskedastic term with a sparse idiosyncratic covariance ``Omega``.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from ridgelet.errors import ConstructionFailed, InvalidInput
from ridgelet.linalg import as_symmetric, min_eigenvalue, sqrt_psd
from ridgelet.panel import ReturnPanel
from ridgelet.weights import WeightVector, mvp_weight

DEFAULT_LOADING_RANGE = (0.5, 1.5)
DISTRIBUTIONS = ("gaussian", "student_t5")
MAX_PD_REPAIRS = 50


@dataclass(frozen=True)
class SparseOmegaSpec:
    """Recipe for a sparse idiosyncratic covariance.

    Off-diagonal entries are drawn as correlations with magnitude in
    ``offdiag_range`` and random sign, soft-thresholded by ``soft_threshold``
    (correlation units), then scaled by ``sqrt(omega_ii * omega_jj)``.
    """

    diag_range: tuple[float, float] = (0.5, 2.0)
    offdiag_density: float = 0.02
    offdiag_range: tuple[float, float] = (0.05, 0.3)
    soft_threshold: float = 0.02
    pd_floor: float = 0.05

    def __post_init__(self):
        lo, hi = self.diag_range
        if not 0 < lo <= hi:
            raise InvalidInput(f"invalid diag_range {self.diag_range}")
        c_lo, c_hi = self.offdiag_range
        if not 0 <= c_lo <= c_hi < 1:
            raise InvalidInput(f"invalid offdiag_range {self.offdiag_range}")
        if not 0 <= self.offdiag_density <= 1:
            raise InvalidInput("offdiag_density must be in [0, 1]")
        if self.soft_threshold < 0 or not self.pd_floor > 0:
            raise InvalidInput("soft_threshold must be >= 0 and pd_floor > 0")


@dataclass(frozen=True, eq=False)
class FactorModelSpec:
    n_assets: int
    r: int
    loadings: np.ndarray
    omega: np.ndarray
    sigma2: float | None
    seed: int | None
    setting: int
    recipe: dict = field(default_factory=dict, repr=False)

    @cached_property
    def sigma(self) -> np.ndarray:
        b = self.loadings
        return as_symmetric(b @ b.T + self.omega)

    @cached_property
    def sigma_sqrt(self) -> np.ndarray:
        return sqrt_psd(self.sigma)

    @cached_property
    def factor_basis(self) -> np.ndarray:
        """Orthonormal eigenvectors of ``B B^T`` for its nonzero eigenvalues."""
        if self.r == 0:
            return np.zeros((self.n_assets, 0))
        u, s, _ = np.linalg.svd(self.loadings, full_matrices=False)
        return u[:, s > 1e-12 * s.max()]

    @cached_property
    def precision_sum(self) -> float:
        from ridgelet.risk import oracle_precision_sum

        return oracle_precision_sum(self.sigma)


def _draw_loadings(rng, n, r, loading_range, loadings):
    if loadings is not None:
        b = np.asarray(loadings, dtype=float).reshape(n, -1)
        if b.shape[1] != r:
            raise InvalidInput(f"forced loadings have {b.shape[1]} columns, expected r={r}")
        return b
    lo, hi = loading_range
    if lo > hi:
        raise InvalidInput(f"invalid loading_range {loading_range}")
    return rng.uniform(lo, hi, size=(n, r))


def build_setting1(
    n: int,
    r: int = 1,
    loading_range=DEFAULT_LOADING_RANGE,
    sigma2: float = 1.0,
    seed: int | None = 0,
    loadings=None,
) -> FactorModelSpec:
    if n < 1 or r < 0:
        raise InvalidInput("need n >= 1 and r >= 0")
    if not sigma2 > 0:
        raise InvalidInput("sigma2 must be positive")
    rng = np.random.default_rng(seed)
    b = _draw_loadings(rng, n, r, loading_range, loadings)
    recipe = dict(setting=1, n=n, r=r, loading_range=tuple(loading_range), sigma2=sigma2, seed=seed)
    return FactorModelSpec(n, r, b, sigma2 * np.eye(n), float(sigma2), seed, 1, recipe if loadings is None else {})


def sparse_omega(n: int, spec: SparseOmegaSpec, rng) -> np.ndarray:
    d = rng.uniform(*spec.diag_range, size=n)
    upper = np.triu(rng.random((n, n)) < spec.offdiag_density, k=1)
    rows, cols = np.nonzero(upper)
    mags = rng.uniform(*spec.offdiag_range, size=rows.size)
    signs = rng.choice((-1.0, 1.0), size=rows.size)
    corr = mags * signs
    scale = np.sqrt(d[rows] * d[cols])

    lam = spec.soft_threshold
    for _ in range(MAX_PD_REPAIRS + 1):
        shrunk = np.sign(corr) * np.maximum(np.abs(corr) - lam, 0.0)
        omega = np.diag(d)
        omega[rows, cols] = shrunk * scale
        omega[cols, rows] = shrunk * scale
        if min_eigenvalue(omega) >= spec.pd_floor:
            return omega
        lam = lam * 1.5 if lam > 0 else 0.01
    raise ConstructionFailed(
        f"Omega not positive definite above floor {spec.pd_floor} after {MAX_PD_REPAIRS} repairs"
    )


def build_setting2(
    n: int,
    r: int = 1,
    loading_range=DEFAULT_LOADING_RANGE,
    omega_spec: SparseOmegaSpec | None = None,
    seed: int | None = 0,
    loadings=None,
) -> FactorModelSpec:
    if n < 1 or r < 0:
        raise InvalidInput("need n >= 1 and r >= 0")
    omega_spec = omega_spec or SparseOmegaSpec()
    rng = np.random.default_rng(seed)
    b = _draw_loadings(rng, n, r, loading_range, loadings)
    omega = sparse_omega(n, omega_spec, rng)
    recipe = dict(setting=2, n=n, r=r, loading_range=tuple(loading_range), seed=seed, **asdict(omega_spec))
    return FactorModelSpec(n, r, b, omega, None, seed, 2, recipe if loadings is None else {})


def sample_returns(
    spec: FactorModelSpec,
    t: int,
    dist: str = "gaussian",
    seed: int | None = 0,
    standardize: bool = True,
) -> ReturnPanel:
    """Draw ``R = Sigma^{1/2} W`` with i.i.d. ``W`` entries.

    ``student_t5`` entries are rescaled by ``sqrt(3/5)`` to unit variance
    unless ``standardize`` is false.
    """
    if t < 1:
        raise InvalidInput("t must be positive")
    rng = np.random.default_rng(seed)
    shape = (spec.n_assets, t)
    if dist == "gaussian":
        w = rng.standard_normal(shape)
    elif dist == "student_t5":
        w = rng.standard_t(5, size=shape)
        if standardize:
            w *= math.sqrt(3.0 / 5.0)
    else:
        raise InvalidInput(f"unknown distribution {dist!r}; expected one of {DISTRIBUTIONS}")
    return ReturnPanel.from_array(spec.sigma_sqrt @ w)


def oracle_of(spec: FactorModelSpec) -> tuple[np.ndarray, WeightVector, float]:
    sigma = spec.sigma
    w = mvp_weight(sigma, method="oracle")
    return sigma, w, 1.0 / spec.precision_sum


def build_spec(setting: int, n: int, **kwargs) -> FactorModelSpec:
    if setting == 1:
        return build_setting1(n, **kwargs)
    if setting == 2:
        return build_setting2(n, **kwargs)
    raise InvalidInput(f"setting must be 1 or 2, got {setting}")


# Config round trip -----------------------------------------------------------

_OMEGA_KEYS = ("diag_range", "offdiag_density", "offdiag_range", "soft_threshold", "pd_floor")


def spec_to_config(spec: FactorModelSpec) -> dict[str, str]:
    """Flat string mapping of the recipe that rebuilt ``spec`` deterministically."""
    if not spec.recipe:
        raise InvalidInput("spec was built from forced loadings and has no reproducible recipe")
    out = {}
    for k, v in spec.recipe.items():
        out[k] = ", ".join(repr(float(x)) for x in v) if isinstance(v, tuple) else repr(v)
    return out


def _pair(text: str) -> tuple[float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 2:
        raise InvalidInput(f"expected two comma-separated numbers, got {text!r}")
    return parts[0], parts[1]


def spec_from_config(section) -> FactorModelSpec:
    get = section.get
    setting = int(get("setting", "1"))
    n = int(get("n"))
    seed_text = get("seed", "0")
    kwargs = dict(
        r=int(get("r", "1")),
        loading_range=_pair(get("loading_range", "0.5, 1.5")),
        seed=None if seed_text == "None" else int(seed_text),
    )
    if setting == 1:
        kwargs["sigma2"] = float(get("sigma2", "1.0"))
    else:
        defaults = SparseOmegaSpec()
        kwargs["omega_spec"] = SparseOmegaSpec(
            diag_range=_pair(get("diag_range")) if "diag_range" in section else defaults.diag_range,
            offdiag_density=float(get("offdiag_density", defaults.offdiag_density)),
            offdiag_range=_pair(get("offdiag_range")) if "offdiag_range" in section else defaults.offdiag_range,
            soft_threshold=float(get("soft_threshold", defaults.soft_threshold)),
            pd_floor=float(get("pd_floor", defaults.pd_floor)),
        )
    return build_spec(setting, n, **kwargs)


def write_spec_config(spec: FactorModelSpec, path, section: str = "dgp") -> None:
    cp = configparser.ConfigParser()
    cp[section] = spec_to_config(spec)
    with Path(path).open("w") as fh:
        cp.write(fh)


def read_spec_config(path, section: str = "dgp") -> FactorModelSpec:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise InvalidInput(f"cannot read config {path}")
    return spec_from_config(cp[section])
