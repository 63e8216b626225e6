"""Covariance model value types."""

from typing import List

import numpy as np
from pydantic import Field, field_validator, model_validator

from ..common.arrays import ArrayModel, frozen_array
from ..error_models.errors import CovarianceError, ErrorCode


class DataMatrix(ArrayModel):
    """Data matrix with features on rows and samples on columns.

    Scales are population standard deviations, so the standardized matrix
    X̃ = (X − means) / scales gives an empirical correlation (1/n) X̃ X̃ᵀ
    with a unit diagonal.
    """

    X: np.ndarray = Field(..., description="p×n raw data, rows are features")
    means: np.ndarray = Field(..., description="Per-feature means (p)")
    scales: np.ndarray = Field(..., description="Per-feature standard deviations (p)")

    @field_validator("X", mode="before")
    @classmethod
    def copy_data(cls, v: object) -> np.ndarray:
        return frozen_array(v, 2, "X")

    @field_validator("means", "scales", mode="before")
    @classmethod
    def copy_vectors(cls, v: object) -> np.ndarray:
        return frozen_array(v, 1, "feature vector")

    @model_validator(mode="after")
    def check_shapes(self) -> "DataMatrix":
        p, n = self.X.shape
        if n < 2:
            raise ValueError(f"need at least 2 samples, got {n}")
        if self.means.shape != (p,) or self.scales.shape != (p,):
            raise ValueError("means and scales must have one entry per feature")
        if np.any(self.scales <= 0.0):
            raise ValueError("scales must be strictly positive")
        return self

    @classmethod
    def from_array(cls, X: np.ndarray) -> "DataMatrix":
        """Build a data matrix, rejecting zero-variance features.

        Raises:
            CovarianceError: DEGENERATE_FEATURE naming the first constant feature
        """
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise CovarianceError(
                ErrorCode.INVALID_ARGUMENT, f"X must be a p×n matrix, got shape {X.shape}"
            )
        means = X.mean(axis=1)
        scales = X.std(axis=1)
        degenerate = np.flatnonzero(scales <= 1e-300)
        if degenerate.size:
            raise CovarianceError(
                ErrorCode.DEGENERATE_FEATURE,
                f"feature {int(degenerate[0])} has zero sample variance",
            )
        return cls(X=X, means=means, scales=scales)

    @property
    def p(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    def standardized(self) -> np.ndarray:
        """Return X̃ = (X − means) / scales."""
        return (self.X - self.means[:, None]) / self.scales[:, None]


class FactorModel(ArrayModel):
    """Diagonal-plus-low-rank covariance Σ = diag(d) + U Uᵀ."""

    d: np.ndarray = Field(..., description="Diagonal entries (p), non-negative")
    U: np.ndarray = Field(..., description="p×k loading matrix")

    @field_validator("d", mode="before")
    @classmethod
    def copy_diagonal(cls, v: object) -> np.ndarray:
        return frozen_array(v, 1, "d")

    @field_validator("U", mode="before")
    @classmethod
    def copy_loadings(cls, v: object) -> np.ndarray:
        return frozen_array(v, 2, "U")

    @model_validator(mode="after")
    def check_model(self) -> "FactorModel":
        p, k = self.U.shape
        if self.d.shape != (p,):
            raise ValueError(f"d has {self.d.shape[0]} entries but U has {p} rows")
        if not 1 <= k <= p:
            raise ValueError(f"rank k must satisfy 1 <= k <= p, got k={k}, p={p}")
        if np.any(self.d < 0.0):
            raise ValueError("d must be non-negative")
        return self

    @property
    def p(self) -> int:
        return self.U.shape[0]

    @property
    def k(self) -> int:
        return self.U.shape[1]

    def diagonal(self) -> np.ndarray:
        """Diagonal of the implied Σ."""
        return self.d + np.einsum("ij,ij->i", self.U, self.U)

    def dense(self) -> np.ndarray:
        """Materialize the implied Σ (p×p)."""
        return np.diag(self.d) + self.U @ self.U.T

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.d * v + self.U @ (self.U.T @ v)

    def to_correlation(self) -> "FactorModel":
        """Rescale so the implied Σ has a unit diagonal."""
        scale = np.sqrt(self.diagonal())
        return FactorModel(d=self.d / scale**2, U=self.U / scale[:, None])

    def residual(self, S: np.ndarray) -> float:
        """Frobenius norm ‖S − diag(d) − U Uᵀ‖."""
        return float(np.linalg.norm(S - self.dense()))


class ShrinkageEstimate(ArrayModel):
    """Ledoit-Wolf shrinkage toward μI of the empirical covariance."""

    delta: float = Field(..., ge=0.0, le=1.0, description="Shrinkage intensity δ")
    mu: float = Field(..., description="Average variance Tr(Σ̂)/p")
    trace: float = Field(..., description="Tr(Σ̂)")
    trace_sq: float = Field(..., description="Tr(Σ̂²)")
    n: int = Field(..., ge=2, description="Number of samples")
    p: int = Field(..., ge=1, description="Number of features")
    no_shrinkage_needed: bool = Field(
        False, description="Σ̂ is a multiple of the identity, δ forced to 0"
    )


class FactorFit(ArrayModel):
    """Result of the alternating minimization."""

    model: FactorModel
    objective_history: List[float] = Field(
        default_factory=list,
        description="‖Σ̂ − D − UUᵀ‖_F² after every iteration",
    )
    iterations: int = Field(0, ge=0)

    @property
    def objective(self) -> float:
        return self.objective_history[-1] if self.objective_history else float("nan")
