"""Common models shared across modules."""

from .arrays import ArrayModel, frozen_array
from .error import ErrorInfo

__all__ = [
    "ArrayModel",
    "frozen_array",
    "ErrorInfo",
]
