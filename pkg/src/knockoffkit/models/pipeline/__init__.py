"""Command-line configuration and benchmark types."""

from .models import (
    BenchMode,
    BenchRecord,
    FdrSummary,
    FilterReport,
    PipelineConfig,
    SlopeFit,
    SolveMetrics,
    SolverChoice,
    SyntheticDataset,
)

__all__ = [
    "BenchMode",
    "BenchRecord",
    "FdrSummary",
    "FilterReport",
    "PipelineConfig",
    "SlopeFit",
    "SolveMetrics",
    "SolverChoice",
    "SyntheticDataset",
]
