"""Knockoff SDP value types."""

from enum import Enum
from typing import Any, Iterator, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..common.arrays import ArrayModel, frozen_array


class SolverTag(str, Enum):
    """Which construction produced an s-vector."""

    EQUI = "equi"
    FULL_NAIVE = "full_naive"
    FULL_STABLE = "full_stable"
    FACTOR = "factor"
    HYBRID = "hybrid"


class SolveStatus(str, Enum):
    """How a barrier solve terminated."""

    CONVERGED = "converged"
    MAX_CYCLES = "max-cycles"
    LAMBDA_FLOOR = "lambda-floor"


# Solvers whose output must be feasible for the Σ they were given
FEASIBLE_SOLVERS = frozenset(
    {SolverTag.EQUI, SolverTag.FULL_NAIVE, SolverTag.FULL_STABLE, SolverTag.HYBRID}
)
FEASIBILITY_TOLERANCE = 1e-6


class BarrierSchedule(BaseModel):
    """Barrier coefficient schedule for the coordinate ascent solvers.

    One cycle is one barrier level. Within a level the solver sweeps all
    coordinates until the largest single-coordinate change is at most
    ``inner_tol`` or ``max_inner_cycles`` sweeps have run, then multiplies λ
    by ``decay``.

    With ``extrapolate`` set, each level after the second starts from
    s_k + μ(s_k − s_{k−1}), the linear continuation of the last two level
    solutions, whenever that point is strictly feasible.

    ``max_inner_cycles=1`` with ``extrapolate=False`` is the plain loop with
    one sweep per level.
    """

    model_config = ConfigDict(frozen=True)

    lambda0: float = Field(1.0, gt=0.0, description="Initial barrier coefficient")
    decay: float = Field(0.5, gt=0.0, lt=1.0, description="Multiplicative decay μ")
    lambda_floor: float = Field(1e-8, gt=0.0, description="Stop once λ drops below this")
    rel_tol: float = Field(
        1e-6,
        gt=0.0,
        description="Stop when the relative objective change is at most p·rel_tol",
    )
    max_cycles: int = Field(100, ge=1, description="Cap on barrier levels")
    inner_tol: float = Field(1e-7, gt=0.0, description="Centering tolerance per level")
    max_inner_cycles: int = Field(50, ge=1, description="Sweeps allowed per level")
    extrapolate: bool = Field(True, description="Warm-start each level from the last two")

    @classmethod
    def from_settings(cls) -> "BarrierSchedule":
        """Default schedule built from the global settings."""
        from ...config import settings

        return cls(
            lambda0=settings.barrier_lambda0,
            decay=settings.barrier_decay,
            lambda_floor=settings.barrier_lambda_floor,
            rel_tol=settings.barrier_rel_tol,
            max_cycles=settings.barrier_max_cycles,
            inner_tol=settings.barrier_inner_tol,
            max_inner_cycles=settings.barrier_max_inner_cycles,
            extrapolate=settings.barrier_extrapolate,
        )

    @classmethod
    def centered(cls, **overrides: Any) -> "BarrierSchedule":
        """Schedule that re-centers at every level.

        Coordinate ascent on the barrier contracts at a rate proportional to λ
        along directions tangent to the PSD boundary, so small λ levels need
        many sweeps to reach the coordinate-wise optimum.
        """
        values: dict[str, Any] = {
            "max_inner_cycles": 50_000,
            "max_cycles": 1_000_000,
            "inner_tol": 1e-10,
        }
        values.update(overrides)
        return cls(**values)

    def levels(self) -> Iterator[float]:
        """Yield the barrier coefficients λ0, μλ0, ... down to the floor."""
        lam = self.lambda0
        while lam >= self.lambda_floor:
            yield lam
            lam *= self.decay


class SdpSolution(ArrayModel):
    """Solution of the knockoff SDP together with solve diagnostics."""

    s: np.ndarray = Field(..., description="s-vector in [0, 1]^p")
    objective: float = Field(..., description="1ᵀs")
    feasibility_margin: float = Field(..., description="λ_min(2Σ − diag(s))")
    cycles: int = Field(0, ge=0, description="Barrier levels visited")
    sweeps: int = Field(0, ge=0, description="Coordinate sweeps performed over all levels")
    solver: SolverTag
    status: SolveStatus = SolveStatus.CONVERGED
    clamps: int = Field(0, ge=0, description="Near-singular clamp events (factor solver)")
    lambda_final: Optional[float] = Field(None, description="Last barrier coefficient used")
    gamma: Optional[float] = Field(None, description="Rescale factor (hybrid only)")
    wall_seconds: float = Field(0.0, ge=0.0, description="Solve time, excluding the final margin check")

    @field_validator("s", mode="before")
    @classmethod
    def copy_s(cls, v: object) -> np.ndarray:
        return frozen_array(v, 1, "s")

    @model_validator(mode="after")
    def check_solution(self) -> "SdpSolution":
        if np.any(self.s < 0.0) or np.any(self.s > 1.0):
            raise ValueError("s must lie in [0, 1]")
        if abs(self.objective - float(np.sum(self.s))) > 1e-12 * max(1.0, self.s.size):
            raise ValueError("objective must equal the sum of s")
        if (
            self.solver in FEASIBLE_SOLVERS
            and self.feasibility_margin < -FEASIBILITY_TOLERANCE
        ):
            raise ValueError(
                f"{self.solver.value} solution is infeasible "
                f"(margin {self.feasibility_margin:.3e})"
            )
        return self

    @property
    def p(self) -> int:
        return self.s.size
