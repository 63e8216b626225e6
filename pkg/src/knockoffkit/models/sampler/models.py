"""Knockoff sampler value types."""

import numpy as np
from pydantic import Field, field_validator, model_validator

from ..common.arrays import ArrayModel, frozen_array


class KnockoffSamplerDense(ArrayModel):
    """Dense conditional Gaussian sampler.

    The knockoff for a column x is μ + L_Omega v with μ = x − diag(s)Σ⁻¹x and
    Ω = L_Omega L_Omegaᵀ = 2diag(s) − diag(s)Σ⁻¹diag(s). ``L_Omega`` is a
    semi-definite Cholesky factor, so rank-deficient Ω (for instance s = 0)
    is allowed.
    """

    s: np.ndarray = Field(..., description="s-vector (p)")
    SigmaInvS: np.ndarray = Field(..., description="Σ⁻¹diag(s), p×p")
    L_Omega: np.ndarray = Field(..., description="Lower-triangular factor of Ω, p×p")

    @field_validator("s", mode="before")
    @classmethod
    def copy_s(cls, v: object) -> np.ndarray:
        return frozen_array(v, 1, "s")

    @field_validator("SigmaInvS", "L_Omega", mode="before")
    @classmethod
    def copy_matrix(cls, v: object) -> np.ndarray:
        return frozen_array(v, 2, "sampler matrix")

    @model_validator(mode="after")
    def check_shapes(self) -> "KnockoffSamplerDense":
        p = self.s.size
        if self.SigmaInvS.shape != (p, p) or self.L_Omega.shape != (p, p):
            raise ValueError("sampler matrices must be p×p")
        if np.any(np.triu(self.L_Omega, 1) != 0.0) or np.any(np.diag(self.L_Omega) < 0.0):
            raise ValueError("L_Omega must be lower triangular with a non-negative diagonal")
        return self

    @property
    def p(self) -> int:
        return self.s.size


class KnockoffSamplerFactor(ArrayModel):
    """Factor-model sampler with Ω = diag(C) + Z Zᵀ.

    Here C = 2s − s²/d (entries may be negative), Z = S D⁻¹ U N and N is the
    Cholesky factor of (I_k + Uᵀ D⁻¹ U)⁻¹.
    """

    C: np.ndarray = Field(..., description="Diagonal part of Ω (p)")
    Z: np.ndarray = Field(..., description="Low-rank part of Ω, p×k")
    N: np.ndarray = Field(..., description="Lower-triangular k×k factor")
    d: np.ndarray = Field(..., description="Factor model diagonal (p), strictly positive")
    U: np.ndarray = Field(..., description="Factor model loadings, p×k")
    s: np.ndarray = Field(..., description="s-vector (p)")

    @field_validator("C", "d", "s", mode="before")
    @classmethod
    def copy_vector(cls, v: object) -> np.ndarray:
        return frozen_array(v, 1, "sampler vector")

    @field_validator("Z", "N", "U", mode="before")
    @classmethod
    def copy_matrix(cls, v: object) -> np.ndarray:
        return frozen_array(v, 2, "sampler matrix")

    @model_validator(mode="after")
    def check_shapes(self) -> "KnockoffSamplerFactor":
        p, k = self.U.shape
        for name in ("C", "d", "s"):
            if getattr(self, name).shape != (p,):
                raise ValueError(f"{name} must have {p} entries")
        if self.Z.shape != (p, k):
            raise ValueError(f"Z must be {p}×{k}")
        if self.N.shape != (k, k) or np.any(np.triu(self.N, 1) != 0.0):
            raise ValueError(f"N must be a {k}×{k} lower-triangular matrix")
        if np.any(self.d <= 0.0):
            raise ValueError("d must be strictly positive")
        return self

    @property
    def p(self) -> int:
        return self.U.shape[0]

    @property
    def k(self) -> int:
        return self.U.shape[1]

    def omega(self) -> np.ndarray:
        """Dense Ω = diag(C) + Z Zᵀ."""
        return np.diag(self.C) + self.Z @ self.Z.T


class LdlFactors(ArrayModel):
    """Factors of C + Z Zᵀ = L(Z, B) diag(Delta) L(Z, B)ᵀ.

    L(Z, B) is unit lower triangular with strictly-lower entries
    L_ij = z_i · b_j.
    """

    B: np.ndarray = Field(..., description="p×k matrix of scaled running vectors")
    Delta: np.ndarray = Field(..., description="Non-negative pivots (p)")

    @field_validator("B", mode="before")
    @classmethod
    def copy_b(cls, v: object) -> np.ndarray:
        return frozen_array(v, 2, "B")

    @field_validator("Delta", mode="before")
    @classmethod
    def copy_delta(cls, v: object) -> np.ndarray:
        return frozen_array(v, 1, "Delta")

    @model_validator(mode="after")
    def check_pivots(self) -> "LdlFactors":
        if self.Delta.shape != (self.B.shape[0],):
            raise ValueError("Delta must have one entry per row of B")
        if np.any(self.Delta < 0.0):
            raise ValueError("Delta must be non-negative")
        return self
