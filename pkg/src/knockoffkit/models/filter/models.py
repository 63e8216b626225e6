"""Knockoff filter value types."""

import math
from enum import Enum
from typing import Dict, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..common.arrays import ArrayModel, frozen_array


class StatisticKind(str, Enum):
    """Feature statistic used to build W."""

    LCD = "lcd"
    CENTROID = "centroid"


class WStatistics(ArrayModel):
    """Antisymmetric per-feature statistics."""

    W: np.ndarray = Field(..., description="One statistic per original feature")
    statistic_kind: StatisticKind
    metadata: Dict[str, float] = Field(
        default_factory=dict, description="Regularization and fit details"
    )

    @field_validator("W", mode="before")
    @classmethod
    def copy_w(cls, v: object) -> np.ndarray:
        return frozen_array(v, 1, "W")

    @property
    def p(self) -> int:
        return self.W.size


class Selection(BaseModel):
    """Features passing the knockoff threshold."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    selected: Tuple[int, ...] = Field(..., description="Selected feature indices, ascending")
    threshold: float = Field(..., ge=0.0, description="τ, +inf when nothing qualifies")
    q: float = Field(..., gt=0.0, lt=1.0, description="Target FDR")
    plus: bool = Field(True, description="Whether the knockoff+ offset was used")

    @model_validator(mode="after")
    def check_threshold(self) -> "Selection":
        if math.isinf(self.threshold) and self.selected:
            raise ValueError("an infinite threshold cannot select features")
        if list(self.selected) != sorted(set(self.selected)):
            raise ValueError("selected indices must be unique and ascending")
        return self


class Evaluation(BaseModel):
    """False discovery proportion and power of a selection."""

    model_config = ConfigDict(frozen=True)

    fdp: float = Field(..., ge=0.0, le=1.0)
    power: float = Field(..., ge=0.0, le=1.0)


class LassoFit(ArrayModel):
    """Coordinate descent lasso result."""

    coef: np.ndarray = Field(..., description="Fitted coefficients")
    alpha: float = Field(..., ge=0.0, description="Penalty λ")
    converged: bool = Field(..., description="Duality gap reached the tolerance")
    n_iter: int = Field(..., ge=0, description="Coordinate sweeps run")
    dual_gap: float = Field(..., description="Final duality gap")

    @field_validator("coef", mode="before")
    @classmethod
    def copy_coef(cls, v: object) -> np.ndarray:
        return frozen_array(v, 1, "coef")
