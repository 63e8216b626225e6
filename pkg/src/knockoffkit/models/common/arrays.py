"""Base model for immutable values holding numpy arrays."""

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict


def frozen_array(value: Any, ndim: int, name: str) -> np.ndarray:
    """Copy ``value`` into a read-only float array of the given rank."""
    array = np.array(value, dtype=float, copy=True)
    if array.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError(f"{name} must be finite")
    array.flags.writeable = False
    return array


class ArrayModel(BaseModel):
    """Frozen pydantic model whose fields may be numpy arrays."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
