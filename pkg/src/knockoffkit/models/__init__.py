"""Models package for knockoffkit."""

from . import common
from . import covariance
from . import error_models
from . import filter
from . import linalg
from . import pipeline
from . import sampler
from . import sdp

__all__ = [
    "common",
    "covariance",
    "error_models",
    "filter",
    "linalg",
    "pipeline",
    "sampler",
    "sdp",
]
