"""Command-line configuration and benchmark record types."""

from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..common.arrays import ArrayModel, frozen_array
from ..covariance.models import FactorModel
from ..error_models.errors import DataError, ErrorCode
from ..filter.models import Evaluation, Selection, StatisticKind
from ..sdp.models import BarrierSchedule


class SolverChoice(str, Enum):
    """Solvers selectable from the command line."""

    EQUI = "equi"
    FULL = "full"
    FULL_NAIVE = "full-naive"
    FACTOR = "factor"
    HYBRID = "hybrid"


class BenchMode(str, Enum):
    """Benchmark experiments."""

    SOLVER_SCALING = "solver-scaling"
    SAMPLER_SCALING = "sampler-scaling"
    RANK_SCALING = "rank-scaling"
    FDR_POWER = "fdr-power"


class PipelineConfig(BaseModel):
    """Settings for one end-to-end run, loadable from a JSON file.

    Command-line flags override values read from the file.
    """

    model_config = ConfigDict(extra="forbid")

    rank: int = Field(5, ge=1, description="Factor model rank k")
    shrink: bool = Field(True, description="Fit the factor model to the Ledoit-Wolf estimate")
    exact_covariance: bool = Field(
        False, description="Use the generating model instead of an estimate (synthetic runs)"
    )
    schedule: BarrierSchedule = Field(default_factory=BarrierSchedule.from_settings)
    solver: SolverChoice = SolverChoice.HYBRID
    statistic: StatisticKind = StatisticKind.LCD
    q: float = Field(0.1, gt=0.0, lt=1.0, description="Target FDR")
    plus: bool = True
    folds: int = Field(5, ge=2, description="Cross-validation folds for the lcd statistic")
    seed: int = Field(0, ge=0)
    trials: int = Field(1, ge=1)

    # synthetic data, used when no data path is given
    n: int = Field(600, ge=2)
    p: int = Field(200, ge=1)
    k: int = Field(20, ge=1, description="Rank of the generating model")
    sparsity: int = Field(30, ge=0)
    amplitude: float = Field(4.5, ge=0.0)

    data_path: Optional[Path] = None
    response_path: Optional[Path] = None
    truth_path: Optional[Path] = None
    output_dir: Path = Path("knockoff-run")

    @model_validator(mode="after")
    def check_sizes(self) -> "PipelineConfig":
        if self.data_path is None and self.sparsity > self.p:
            raise ValueError(f"sparsity {self.sparsity} exceeds p = {self.p}")
        return self

    def check_paths(self) -> None:
        """Raise if an input path is missing.

        Raises:
            DataError: FILE_NOT_FOUND naming the first missing path
        """
        for path in (self.data_path, self.response_path, self.truth_path):
            if path is not None and not path.exists():
                raise DataError(ErrorCode.FILE_NOT_FOUND, f"file not found: {path}")


class BenchRecord(BaseModel):
    """One benchmark row, keyed by (mode, p, k, solver, amplitude, trial)."""

    model_config = ConfigDict(frozen=True)

    mode: BenchMode
    p: int = Field(..., ge=1)
    k: int = Field(..., ge=0)
    solver: str
    trial: int = Field(0, ge=0)
    cycles: int = Field(..., ge=1)
    wall_seconds: float = Field(..., gt=0.0)
    objective: Optional[float] = None
    feasibility_margin: Optional[float] = None
    fdp: Optional[float] = None
    power: Optional[float] = None
    amplitude: Optional[float] = None
    sweeps: Optional[int] = Field(None, ge=0, description="Coordinate sweeps, for barrier solves")

    @classmethod
    def header(cls) -> List[str]:
        return list(cls.model_fields)


class SolveMetrics(BaseModel):
    """JSON sidecar written next to an s-vector."""

    solver: str
    status: str
    objective: float
    feasibility_margin: float
    cycles: int
    wall_seconds: float
    sweeps: int = 0
    clamps: int = 0
    gamma: Optional[float] = None


class SlopeFit(BaseModel):
    """Least-squares fit of log(time) against log(size)."""

    solver: str
    x: str = Field(..., description="Size column that was varied")
    slope: float
    intercept: float
    points: int = Field(..., ge=0)


class FdrSummary(BaseModel):
    """Mean FDP and power over the trials of one (solver, amplitude) cell."""

    solver: str
    amplitude: float
    trials: int = Field(..., ge=1)
    mean_fdp: float
    mean_power: float


class FilterReport(BaseModel):
    """Metrics written next to a selection."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    statistic: StatisticKind
    selection: Selection
    selected_count: int = Field(..., ge=0)
    metadata: Dict[str, float] = Field(default_factory=dict)
    evaluation: Optional[Evaluation] = None


class SyntheticDataset(ArrayModel):
    """Data drawn from a known factor model with a sparse linear response."""

    X: np.ndarray = Field(..., description="p×n features, columns drawn from N(0, Σ)")
    y: np.ndarray = Field(..., description="n-vector response Xᵀβ + ε")
    beta: np.ndarray = Field(..., description="True coefficients (p)")
    generating: FactorModel = Field(..., description="Model before normalization, Σ = D + VVᵀ")
    correlation: FactorModel = Field(..., description="Unit-diagonal model the columns follow")

    @field_validator("X", mode="before")
    @classmethod
    def copy_x(cls, v: object) -> np.ndarray:
        return frozen_array(v, 2, "X")

    @field_validator("y", "beta", mode="before")
    @classmethod
    def copy_vector(cls, v: object) -> np.ndarray:
        return frozen_array(v, 1, "vector")

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.beta))
