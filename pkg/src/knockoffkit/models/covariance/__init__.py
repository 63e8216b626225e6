"""Covariance value types."""

from .models import DataMatrix, FactorFit, FactorModel, ShrinkageEstimate

__all__ = [
    "DataMatrix",
    "FactorFit",
    "FactorModel",
    "ShrinkageEstimate",
]
