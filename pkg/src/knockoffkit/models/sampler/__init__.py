"""Knockoff sampler value types."""

from .models import KnockoffSamplerDense, KnockoffSamplerFactor, LdlFactors

__all__ = [
    "KnockoffSamplerDense",
    "KnockoffSamplerFactor",
    "LdlFactors",
]
