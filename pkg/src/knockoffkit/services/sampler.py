"""Gaussian knockoff sampling.

Knockoffs are drawn from the conditional law x̃ | x ~ N(x − diag(s)Σ⁻¹x, Ω)
with Ω = 2diag(s) − diag(s)Σ⁻¹diag(s). The dense sampler factors Ω directly;
the factor sampler writes Ω = diag(C) + Z Zᵀ and draws through a streaming
L Δ Lᵀ factorization in O(pk²) time and O(p + k²) memory per column.
"""

import logging
from typing import Any, Callable, Iterator, Optional, Tuple, TypeVar, Union

import numpy as np
import scipy.linalg

from ..config import settings
from ..models.covariance import DataMatrix, FactorModel
from ..models.error_models import ErrorCode, KnockoffError, SamplerError
from ..models.sampler import KnockoffSamplerDense, KnockoffSamplerFactor, LdlFactors
from . import kernels
from .linalg import psd_cholesky

logger = logging.getLogger(__name__)

NEGATIVE_PIVOT_TOL = 1e-8
COLUMN_BLOCK = 256

Sampler = Union[KnockoffSamplerDense, KnockoffSamplerFactor]
T = TypeVar("T")


def _check_s(s: np.ndarray, p: int) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.shape != (p,):
        raise SamplerError(ErrorCode.DIMENSION_MISMATCH, f"s must have {p} entries, got {s.shape}")
    if np.any(s < 0.0):
        raise SamplerError(ErrorCode.INVALID_ARGUMENT, "s must be non-negative")
    return s


def build_dense_sampler(Sigma: np.ndarray, s: np.ndarray) -> KnockoffSamplerDense:
    """
    Precompute Σ⁻¹diag(s) and a factor of Ω for a dense Σ.

    Args:
        Sigma: Positive-definite p×p covariance
        s: Non-negative p-vector

    Returns:
        KnockoffSamplerDense

    Raises:
        SamplerError: NOT_POSITIVE_DEFINITE for singular Σ, INFEASIBLE_S when Ω
            has an eigenvalue below −1e-8
    """
    Sigma = np.asarray(Sigma, dtype=float)
    s = _check_s(s, Sigma.shape[0])
    try:
        factor = scipy.linalg.cho_factor(Sigma, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise SamplerError(ErrorCode.NOT_POSITIVE_DEFINITE, "Σ must be positive definite") from exc

    sigma_inv_s = scipy.linalg.cho_solve(factor, np.diag(s))
    omega = 2.0 * np.diag(s) - s[:, None] * sigma_inv_s
    omega = (omega + omega.T) / 2.0
    lam_min = float(np.linalg.eigvalsh(omega)[0]) if s.size else 0.0
    if lam_min < -settings.psd_tol:
        raise SamplerError(
            ErrorCode.INFEASIBLE_S,
            f"s is infeasible for sampling (λ_min(Ω) = {lam_min:.3e}); "
            "rescale it with the hybrid solver first",
        )
    try:
        L_omega = psd_cholesky(omega)
    except KnockoffError as exc:
        raise SamplerError(ErrorCode.INFEASIBLE_S, str(exc.message)) from exc
    return KnockoffSamplerDense(s=s, SigmaInvS=sigma_inv_s, L_Omega=L_omega)


def build_factor_sampler(model: FactorModel, s: np.ndarray) -> KnockoffSamplerFactor:
    """
    Set up Ω = diag(C) + Z Zᵀ for Σ = D + U Uᵀ in O(pk²) without forming Σ.

    C = 2s − s²/d, N is the Cholesky factor of (I + Uᵀ D⁻¹ U)⁻¹ and
    Z = S D⁻¹ U N.

    Raises:
        SamplerError: NOT_POSITIVE_DEFINITE when d has a non-positive entry
    """
    s = _check_s(s, model.p)
    d = np.asarray(model.d)
    U = np.asarray(model.U)
    if np.any(d <= 0.0):
        raise SamplerError(
            ErrorCode.NOT_POSITIVE_DEFINITE,
            "factor sampler requires d > 0; refit with a positive min_diagonal",
        )
    gram = np.eye(model.k) + U.T @ (U / d[:, None])
    try:
        gram_inv = scipy.linalg.cho_solve(scipy.linalg.cho_factor(gram, lower=True), np.eye(model.k))
        N = scipy.linalg.cholesky((gram_inv + gram_inv.T) / 2.0, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise SamplerError(ErrorCode.NOT_POSITIVE_DEFINITE, "I + UᵀD⁻¹U is not positive definite") from exc

    C = 2.0 * s - s**2 / d
    Z = (s / d)[:, None] * (U @ N)
    return KnockoffSamplerFactor(C=C, Z=Z, N=N, d=d, U=U, s=s)


def _raise_on_pivot(status: int) -> None:
    if status:
        raise SamplerError(
            ErrorCode.INPUT_NOT_PSD,
            f"diag(C) + ZZᵀ is not PSD (negative pivot at row {status - 1})",
        )


def _as_block(v: np.ndarray) -> Tuple[np.ndarray, bool]:
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        return np.ascontiguousarray(v[:, None]), True
    return np.ascontiguousarray(v), False


def ldl_factorize(C: np.ndarray, Z: np.ndarray, eps: Optional[float] = None) -> LdlFactors:
    """
    Factor diag(C) + Z Zᵀ = L(Z, B) diag(Delta) L(Z, B)ᵀ in O(pk²).

    C may have negative entries as long as the sum is PSD. Pivots at or below
    ``eps`` are treated as zero with b_j = 0.

    Raises:
        SamplerError: INPUT_NOT_PSD on a pivot below −1e-8
    """
    eps = settings.zero_pivot_eps if eps is None else eps
    C = np.ascontiguousarray(C, dtype=float)
    Z = np.ascontiguousarray(Z, dtype=float)
    if Z.shape[0] != C.size:
        raise SamplerError(ErrorCode.DIMENSION_MISMATCH, "C and Z must have the same number of rows")
    B, Delta, status = kernels.ldl_factorize(C, Z, eps, NEGATIVE_PIVOT_TOL)
    _raise_on_pivot(status)
    return LdlFactors(B=B, Delta=Delta)


def ldl_multiply(Z: np.ndarray, B: np.ndarray, Delta: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Return L(Z, B) diag(√Delta) v in O(pk) per column; v may be p or p×n."""
    block, single = _as_block(v)
    out = kernels.ldl_multiply(
        np.ascontiguousarray(Z, dtype=float),
        np.ascontiguousarray(B, dtype=float),
        np.ascontiguousarray(Delta, dtype=float),
        block,
    )
    return out[:, 0] if single else out


def sample_low_rank(C: np.ndarray, Z: np.ndarray, v: np.ndarray, eps: Optional[float] = None) -> np.ndarray:
    """
    Draw from N(0, diag(C) + Z Zᵀ) given standard normal noise v (p or p×n).

    One pass fuses the factorization and the product, so neither B nor Delta
    is stored. The result equals ``ldl_multiply(Z, *ldl_factorize(C, Z), v)``.

    Raises:
        SamplerError: INPUT_NOT_PSD on a pivot below −1e-8
    """
    eps = settings.zero_pivot_eps if eps is None else eps
    block, single = _as_block(v)
    out, status = kernels.sample_low_rank(
        np.ascontiguousarray(C, dtype=float),
        np.ascontiguousarray(Z, dtype=float),
        block,
        eps,
        NEGATIVE_PIVOT_TOL,
    )
    _raise_on_pivot(status)
    return out[:, 0] if single else out


def conditional_mean_factor(x: np.ndarray, sampler: KnockoffSamplerFactor) -> np.ndarray:
    """
    x − diag(s)Σ⁻¹x for Σ = D + U Uᵀ in O(pk); x may be p or p×n.

    Uses Σ⁻¹ = D⁻¹ − D⁻¹U N Nᵀ UᵀD⁻¹, so the correction term is
    Z (Nᵀ Uᵀ D⁻¹ x).
    """
    x = np.asarray(x, dtype=float)
    scaled = x / (sampler.d if x.ndim == 1 else sampler.d[:, None])
    s = sampler.s if x.ndim == 1 else sampler.s[:, None]
    return x - s * scaled + sampler.Z @ (sampler.N.T @ (sampler.U.T @ scaled))


def conditional_mean_dense(x: np.ndarray, sampler: KnockoffSamplerDense) -> np.ndarray:
    """x − diag(s)Σ⁻¹x; x may be p or p×n."""
    return np.asarray(x, dtype=float) - sampler.SigmaInvS.T @ x


def column_noise(seed: int, columns: range, p: int) -> np.ndarray:
    """Standard normal p×len(columns) block, column i drawn from its own Philox stream."""
    block = np.empty((p, len(columns)))
    for offset, i in enumerate(columns):
        stream = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(i,))))
        block[:, offset] = stream.standard_normal(p)
    return block


def _infeasible_on_pivot(func: Callable[..., T], *args: Any) -> T:
    """Report a negative pivot of Ω as an infeasible s."""
    try:
        return func(*args)
    except SamplerError as exc:
        if exc.code is not ErrorCode.INPUT_NOT_PSD:
            raise
        raise SamplerError(
            ErrorCode.INFEASIBLE_S,
            f"s is infeasible for sampling ({exc.message}); rescale it with the hybrid solver first",
        ) from exc


def _check_data(X: Union[DataMatrix, np.ndarray], sampler: Sampler) -> np.ndarray:
    data = X.X if isinstance(X, DataMatrix) else np.asarray(X, dtype=float)
    if data.ndim != 2 or data.shape[0] != sampler.p:
        raise SamplerError(
            ErrorCode.DIMENSION_MISMATCH,
            f"data has shape {data.shape} but the sampler expects {sampler.p} features",
        )
    return data


class LdlStream:
    """Row-at-a-time form of the streaming L Δ Lᵀ sampler.

    Holds the running k×k matrix M and the buffer w (k, or k×n for a block of
    n noise columns). ``push`` consumes one row (C_j, z_j, v_j) and returns
    u_j, so rows of B and Δ are never stored. ``sample_low_rank`` is the
    compiled whole-block equivalent.
    """

    def __init__(self, k: int, columns: Optional[int] = None, eps: Optional[float] = None) -> None:
        self.M = np.eye(k)
        self.w = np.zeros(k) if columns is None else np.zeros((k, columns))
        self.eps = settings.zero_pivot_eps if eps is None else eps
        self.row = 0
        self.delta = 0.0
        self.b = np.zeros(k)

    def push(self, c: float, z: np.ndarray, v: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        t = self.M @ z
        delta = c + float(z @ t)
        if delta < -NEGATIVE_PIVOT_TOL:
            raise SamplerError(
                ErrorCode.INPUT_NOT_PSD,
                f"diag(C) + ZZᵀ is not PSD (negative pivot at row {self.row})",
            )
        if delta > self.eps:
            self.b = t / delta
            self.M -= np.outer(t, t) / delta
            self.delta = delta
        else:
            self.b = np.zeros_like(t)
            self.delta = 0.0
        scaled = np.sqrt(self.delta) * v
        u = scaled + z @ self.w
        self.w += np.multiply.outer(self.b, scaled)
        self.row += 1
        return u


def iter_knockoff_rows(
    X: Union[DataMatrix, np.ndarray],
    sampler: KnockoffSamplerFactor,
    seed: int,
) -> Iterator[np.ndarray]:
    """
    Yield the knockoff matrix one feature row at a time.

    The rows equal those of ``sample_knockoffs(X, sampler, seed)`` up to
    rounding: the noise comes from the same per-column streams, and the
    LΔLᵀ factor is built while the rows are produced.

    Raises:
        SamplerError: DIMENSION_MISMATCH, or INFEASIBLE_S on a negative pivot of Ω
    """
    data = _check_data(X, sampler)
    p, n = data.shape
    mean = conditional_mean_factor(data, sampler)
    noise = column_noise(seed, range(n), p)
    stream = LdlStream(sampler.k, columns=n)
    for j in range(p):
        draw = _infeasible_on_pivot(stream.push, float(sampler.C[j]), sampler.Z[j], noise[j])
        yield mean[j] + draw
    logger.debug("Streamed %d knockoff rows for n=%d", p, n)


def sample_knockoffs(
    X: Union[DataMatrix, np.ndarray],
    sampler: Sampler,
    seed: int,
    stream: bool = False,
) -> np.ndarray:
    """
    Draw one knockoff copy of every column of X.

    X must be on the scale of the Σ the sampler was built for (for a
    correlation matrix, standardized features). Column i uses noise from a
    Philox stream keyed by (seed, i), so the output does not depend on how
    columns are grouped or ordered.

    Args:
        X: p×n data
        sampler: Dense or factor sampler
        seed: Master seed
        stream: For the factor sampler, fuse factorization and product per block
            instead of factoring once

    Returns:
        np.ndarray: p×n knockoff matrix
    """
    data = _check_data(X, sampler)
    p, n = data.shape

    factors: Optional[LdlFactors] = None
    if isinstance(sampler, KnockoffSamplerFactor):
        mean = conditional_mean_factor(data, sampler)
        if not stream:
            factors = _infeasible_on_pivot(ldl_factorize, sampler.C, sampler.Z)
    else:
        mean = conditional_mean_dense(data, sampler)

    knockoffs = np.empty((p, n))
    for start in range(0, n, COLUMN_BLOCK):
        columns = range(start, min(n, start + COLUMN_BLOCK))
        noise = column_noise(seed, columns, p)
        if isinstance(sampler, KnockoffSamplerDense):
            draw = sampler.L_Omega @ noise
        elif factors is None:
            draw = _infeasible_on_pivot(sample_low_rank, sampler.C, sampler.Z, noise)
        else:
            draw = ldl_multiply(sampler.Z, factors.B, factors.Delta, noise)
        knockoffs[:, columns.start : columns.stop] = mean[:, columns.start : columns.stop] + draw
    logger.debug("Sampled %d knockoff columns for p=%d", n, p)
    return knockoffs
