"""Knockoff SDP value types."""

from .models import BarrierSchedule, SdpSolution, SolverTag, SolveStatus

__all__ = [
    "BarrierSchedule",
    "SdpSolution",
    "SolverTag",
    "SolveStatus",
]
