"""Random problem generators for the synth and bench commands."""

import logging
import math
from typing import Optional

import numpy as np

from ..models.covariance import FactorModel
from ..models.error_models import DataError, ErrorCode
from ..models.pipeline import SyntheticDataset

logger = logging.getLogger(__name__)


def draw_features(model: FactorModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """
    Draw n columns x_i ~ N(0, diag(d) + U Uᵀ) in O(npk).

    Returns:
        np.ndarray: p×n matrix
    """
    G = rng.standard_normal((model.p, n))
    H = rng.standard_normal((model.k, n))
    return np.sqrt(model.d)[:, None] * G + model.U @ H


def fdr_dataset(
    n: int,
    p: int,
    k: int,
    sparsity: int,
    amplitude: float,
    seed: int,
) -> SyntheticDataset:
    """
    Regression data for the FDR and power experiments.

    Σ = D + V Vᵀ with D_ii ~ U[0, 1] and V_ij ~ N(0, 1/k), normalized to unit
    diagonal; the columns of X follow the normalized model. y = Xᵀβ + ε with
    ε ~ N(0, 1) and β carrying ``sparsity`` nonzeros of magnitude
    amplitude/√n and random signs.

    Every draw except β's magnitude depends on ``seed`` alone, so a sweep over
    amplitudes with one seed shares X, the support, the signs and the noise.

    Raises:
        DataError: INVALID_ARGUMENT for inconsistent sizes
    """
    if not 1 <= k <= p:
        raise DataError(ErrorCode.INVALID_ARGUMENT, f"rank k must satisfy 1 <= k <= p, got k={k}, p={p}")
    if not 0 <= sparsity <= p:
        raise DataError(ErrorCode.INVALID_ARGUMENT, f"sparsity must lie in [0, {p}], got {sparsity}")
    if n < 2:
        raise DataError(ErrorCode.INVALID_ARGUMENT, f"need at least 2 samples, got {n}")

    rng = np.random.default_rng(seed)
    generating = FactorModel(
        d=rng.uniform(0.0, 1.0, p),
        U=rng.normal(0.0, 1.0 / math.sqrt(k), (p, k)),
    )
    correlation = generating.to_correlation()
    X = draw_features(correlation, n, rng)

    support = np.sort(rng.choice(p, size=sparsity, replace=False))
    signs = rng.choice((-1.0, 1.0), size=sparsity)
    noise = rng.standard_normal(n)

    beta = np.zeros(p)
    beta[support] = signs * amplitude / math.sqrt(n)
    y = X.T @ beta + noise
    logger.debug("synthetic dataset n=%d p=%d k=%d sparsity=%d amplitude=%g", n, p, k, sparsity, amplitude)
    return SyntheticDataset(X=X, y=y, beta=beta, generating=generating, correlation=correlation)


def benchmark_model(p: int, k: Optional[int] = None, seed: int = 0) -> FactorModel:
    """
    Solver benchmark covariance 10⁻³I + VΛVᵀ with Λ_ii ~ U[0, 1], V_ij ~ N(0, 1).

    Args:
        p: Dimension
        k: Rank, ⌈0.05p⌉ when omitted
        seed: RNG seed

    Returns:
        FactorModel: the correlation-normalized model
    """
    k = max(1, math.ceil(0.05 * p)) if k is None else k
    if not 1 <= k <= p:
        raise DataError(ErrorCode.INVALID_ARGUMENT, f"rank k must satisfy 1 <= k <= p, got k={k}, p={p}")
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((p, k))
    Lam = rng.uniform(0.0, 1.0, k)
    raw = FactorModel(d=np.full(p, 1e-3), U=V * np.sqrt(Lam))
    return raw.to_correlation()
