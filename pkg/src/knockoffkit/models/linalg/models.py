"""Factorization value types."""

import numpy as np
from pydantic import Field, field_validator, model_validator

from ..common.arrays import ArrayModel, frozen_array


class LowerTriangularFactor(ArrayModel):
    """Cholesky factor L of a symmetric positive-definite matrix A = L Lᵀ."""

    L: np.ndarray = Field(..., description="Lower-triangular p×p factor")

    @field_validator("L", mode="before")
    @classmethod
    def copy_factor(cls, v: object) -> np.ndarray:
        return frozen_array(v, 2, "L")

    @model_validator(mode="after")
    def check_triangular(self) -> "LowerTriangularFactor":
        p, q = self.L.shape
        if p != q:
            raise ValueError(f"L must be square, got shape {self.L.shape}")
        if np.any(np.triu(self.L, 1) != 0.0):
            raise ValueError("L must be lower triangular")
        if np.any(np.diag(self.L) <= 0.0):
            raise ValueError("L must have a strictly positive diagonal")
        return self

    @property
    def p(self) -> int:
        return self.L.shape[0]

    def product(self) -> np.ndarray:
        """Return L Lᵀ."""
        return self.L @ self.L.T


class QRFactors(ArrayModel):
    """Q R factors of a k×k matrix."""

    Q: np.ndarray = Field(..., description="Orthogonal k×k factor")
    R: np.ndarray = Field(..., description="Upper-triangular k×k factor")

    @field_validator("Q", "R", mode="before")
    @classmethod
    def copy_factor(cls, v: object) -> np.ndarray:
        return frozen_array(v, 2, "QR factor")

    @model_validator(mode="after")
    def check_shapes(self) -> "QRFactors":
        k = self.Q.shape[0]
        if self.Q.shape != (k, k) or self.R.shape != (k, k):
            raise ValueError("Q and R must be square and of the same size")
        if np.linalg.norm(self.Q.T @ self.Q - np.eye(k)) > 1e-8:
            raise ValueError("Q must be orthogonal")
        return self

    @property
    def k(self) -> int:
        return self.Q.shape[0]

    def product(self) -> np.ndarray:
        """Return Q R."""
        return self.Q @ self.R
