"""Dispatch from method tags to weight estimators on one training window."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ridgelet import covariance as cov
from ridgelet import weights as wt
from ridgelet.errors import InvalidInput
from ridgelet.panel import as_matrix

AVAILABLE = (
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
NEEDS_POPULATION = {"oracle", "ridgelet2_ifs", "factor_eliminating"}


@dataclass
class PoetOptions:
    r_max: int = cov.DEFAULT_R_MAX
    c1: float | str = "cv"
    grid: tuple = cov.DEFAULT_C1_GRID
    folds: int = 5
    r: int | None = None


def check_methods(methods, population_known: bool) -> tuple[str, ...]:
    methods = tuple(methods)
    unknown = [m for m in methods if m not in AVAILABLE]
    if unknown:
        raise InvalidInput(f"unknown methods {unknown}; available: {', '.join(AVAILABLE)}")
    if not population_known:
        bad = [m for m in methods if m in NEEDS_POPULATION]
        if bad:
            raise InvalidInput(f"methods {bad} need the population covariance")
    return methods


@dataclass
class MethodSuite:
    """Weight estimators sharing one training matrix and its sample covariance.

    ``spec`` supplies population quantities for the oracle, infeasible
    Ridgelet2 and factor-eliminating rules. ``omega_data`` optionally feeds
    POET a different (e.g. held-out) sample than the weight estimation.
    """

    returns: np.ndarray
    tau: float = cov.DEFAULT_TAU
    demean: bool = False
    spec: object = None
    poet: PoetOptions = field(default_factory=PoetOptions)
    omega_data: np.ndarray | None = None

    def __post_init__(self):
        self.returns = as_matrix(self.returns)

    @cached_property
    def s0(self) -> np.ndarray:
        return cov.sample_cov(self.returns, self.demean)

    @cached_property
    def poet_result(self) -> cov.PoetResult:
        data = self.returns if self.omega_data is None else self.omega_data
        p = self.poet
        return cov.poet(
            data, r_max=p.r_max, c1=p.c1, r=p.r, grid=p.grid, folds=p.folds, tau=self.tau, demean=self.demean
        )

    @cached_property
    def omega_hat(self) -> np.ndarray:
        return cov.repair_pd(self.poet_result.omega_hat)[0]

    def weight(self, method: str) -> wt.WeightVector:
        n = self.returns.shape[0]
        if method == "oracle":
            return wt.oracle_weight(self.spec.sigma)
        if method == "plugin":
            return wt.mvp_weight(self.s0, "plugin")
        if method == "ridgelet1":
            return wt.mvp_weight(cov.ridge_augment(self.s0, self.tau), "ridgelet1")
        if method == "ridgelet2":
            return wt.mvp_weight(cov.ridge_augment(self.s0, self.tau, self.omega_hat), "ridgelet2")
        if method == "ridgelet2_ifs":
            return wt.mvp_weight(cov.ridge_augment(self.s0, self.tau, self.spec.omega), "ridgelet2_ifs")
        if method == "ridgeless":
            return wt.ridgeless_weight(self.returns, self.demean)
        if method == "exact_zvp":
            return wt.exact_zvp_weight(self.returns, self.demean)
        if method == "equal":
            return wt.equal_weight(n)
        if method == "factor_eliminating":
            return wt.factor_eliminating_weight(self.spec.factor_basis)
        if method == "ls":
            return wt.mvp_weight(cov.linear_shrinkage(self.returns, self.demean), "ls")
        raise InvalidInput(f"unknown method {method!r}")
