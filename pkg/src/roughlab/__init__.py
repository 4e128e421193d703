"""Certified exact-arithmetic experiments with rough continuous functions."""

from .exact import (
    CapacityError,
    DomainError,
    Enclosure,
    FunctionHandle,
    FunctionHandle2D,
    PiecewiseLinear,
    TightenTolerance,
    Verdict,
    as_rational,
)

__all__ = [
    "CapacityError",
    "DomainError",
    "Enclosure",
    "FunctionHandle",
    "FunctionHandle2D",
    "PiecewiseLinear",
    "TightenTolerance",
    "Verdict",
    "as_rational",
]
__version__ = "0.1.0"
