"""Shared fixtures."""

import numpy as np
import pytest
from typer.testing import CliRunner

from knockoffkit.models.covariance import FactorModel

from .oracles import planted_model, random_correlation


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def correlation_50() -> np.ndarray:
    return random_correlation(50, seed=3)


@pytest.fixture
def planted_small() -> FactorModel:
    return planted_model(30, 3, seed=5)


@pytest.fixture
def equicorrelated():
    """2×2 correlation matrix with off-diagonal ρ."""

    def build(rho: float) -> np.ndarray:
        return np.array([[1.0, rho], [rho, 1.0]])

    return build
