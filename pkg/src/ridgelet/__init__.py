"""Minimum-variance portfolios for many assets and few observations.

The core estimators are minimum-variance weights built from a sample
covariance augmented by a tiny ridge, either ``tau * I`` (``ridgelet1``) or
``tau * omega_hat`` with a POET idiosyncratic covariance (``ridgelet2``).
"""

__version__ = "0.1.0"

from ridgelet.errors import (  # noqa: E402
    DataError,
    InvalidInput,
    NumericalError,
    RidgeletError,
)
from ridgelet.panel import ReturnPanel, load_returns_csv, write_returns_csv  # noqa: E402
from ridgelet.weights import (  # noqa: E402
    WeightVector,
    equal_weight,
    exact_zvp_weight,
    factor_eliminating_weight,
    mvp_weight,
    ridgeless_weight,
    ridgelet1_weight,
    ridgelet2_weight,
)

__all__ = [
    "DataError",
    "InvalidInput",
    "NumericalError",
    "RidgeletError",
    "ReturnPanel",
    "WeightVector",
    "equal_weight",
    "exact_zvp_weight",
    "factor_eliminating_weight",
    "load_returns_csv",
    "mvp_weight",
    "ridgeless_weight",
    "ridgelet1_weight",
    "ridgelet2_weight",
    "write_returns_csv",
]
