"""Numerical toolkit for cone-carried analytic functionals, Gelfand-Shilov
test-function norms, Wick power series and their Euclidean continuation."""

from ._backend import USE_NUMBA
from .errors import (
    DimensionError,
    HypothesisViolation,
    InvalidInputError,
    IrqftError,
    MalformedConeError,
    NumericalFailure,
    TruncationInsufficient,
    TubeViolation,
    UnsupportedRepresentationError,
)

__version__ = "0.1.0"

__all__ = [
    "USE_NUMBA",
    "DimensionError",
    "HypothesisViolation",
    "InvalidInputError",
    "IrqftError",
    "MalformedConeError",
    "NumericalFailure",
    "TruncationInsufficient",
    "TubeViolation",
    "UnsupportedRepresentationError",
]
