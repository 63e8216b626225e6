"""Error codes and exceptions."""

from .errors import (
    ErrorCode,
    KnockoffError,
    LinalgError,
    CovarianceError,
    SolverError,
    SamplerError,
    FilterError,
    DataError,
)

__all__ = [
    "ErrorCode",
    "KnockoffError",
    "LinalgError",
    "CovarianceError",
    "SolverError",
    "SamplerError",
    "FilterError",
    "DataError",
]
