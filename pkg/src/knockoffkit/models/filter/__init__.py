"""Knockoff filter value types."""

from .models import Evaluation, LassoFit, Selection, StatisticKind, WStatistics

__all__ = [
    "Evaluation",
    "LassoFit",
    "Selection",
    "StatisticKind",
    "WStatistics",
]
