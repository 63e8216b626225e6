"""Linear-algebra value types."""

from .models import LowerTriangularFactor, QRFactors

__all__ = [
    "LowerTriangularFactor",
    "QRFactors",
]
