"""Covariance estimation: empirical correlation, Ledoit-Wolf shrinkage and factor models."""

import logging
from typing import Optional, Union

import numpy as np
from scipy.sparse.linalg import LinearOperator

from ..config import settings
from ..models.covariance import DataMatrix, FactorFit, FactorModel, ShrinkageEstimate
from ..models.error_models import CovarianceError, ErrorCode
from .linalg import top_k_eigen

logger = logging.getLogger(__name__)

DataLike = Union[DataMatrix, np.ndarray]


def as_data_matrix(X: DataLike) -> DataMatrix:
    """Accept a DataMatrix or a raw p×n array."""
    if isinstance(X, DataMatrix):
        return X
    return DataMatrix.from_array(X)


def empirical_correlation(X: DataLike) -> np.ndarray:
    """
    Empirical correlation (1/n) X̃ X̃ᵀ of the standardized data.

    Raises:
        CovarianceError: DEGENERATE_FEATURE for a zero-variance feature
    """
    data = as_data_matrix(X)
    Xs = data.standardized()
    R = Xs @ Xs.T / data.n
    R = (R + R.T) / 2.0
    np.fill_diagonal(R, 1.0)
    return R


def _gram_trace_sq(Xs: np.ndarray) -> float:
    """‖X̃ X̃ᵀ‖_F², using whichever Gram matrix is smaller."""
    p, n = Xs.shape
    gram = Xs.T @ Xs if p > n else Xs @ Xs.T
    return float(np.sum(gram * gram))


def ledoit_wolf(X: DataLike) -> ShrinkageEstimate:
    """
    Optimal shrinkage of the empirical correlation toward μI.

    Traces are computed from Gram identities so Σ̂ is never formed when p > n.

    Args:
        X: Data matrix (p×n)

    Returns:
        ShrinkageEstimate: δ clamped to [0, 1]; δ = 0 with ``no_shrinkage_needed``
        when Σ̂ is already a multiple of the identity
    """
    data = as_data_matrix(X)
    Xs = data.standardized()
    n, p = data.n, data.p

    trace = float(np.sum(Xs * Xs)) / n
    trace_sq = _gram_trace_sq(Xs) / n**2
    mu = trace / p

    denominator = trace_sq - trace**2 / p
    if denominator <= 1e-12:
        logger.info("Empirical covariance is a multiple of the identity, no shrinkage applied")
        return ShrinkageEstimate(
            delta=0.0, mu=mu, trace=trace, trace_sq=trace_sq, n=n, p=p, no_shrinkage_needed=True
        )

    fourth = float(np.sum(np.sum(Xs * Xs, axis=0) ** 2))
    numerator = (fourth - n * trace_sq) / n**2
    delta = float(np.clip(numerator / denominator, 0.0, 1.0))
    logger.debug("Ledoit-Wolf delta=%.6g mu=%.6g (n=%d, p=%d)", delta, mu, n, p)
    return ShrinkageEstimate(delta=delta, mu=mu, trace=trace, trace_sq=trace_sq, n=n, p=p)


def shrunk_covariance(X: DataLike, estimate: Optional[ShrinkageEstimate] = None) -> np.ndarray:
    """Dense (1 − δ)Σ̂ + δμI."""
    estimate = ledoit_wolf(X) if estimate is None else estimate
    S = empirical_correlation(X)
    return (1.0 - estimate.delta) * S + estimate.delta * estimate.mu * np.eye(S.shape[0])


class _DenseSource:
    """Σ̂ given explicitly."""

    def __init__(self, S: np.ndarray) -> None:
        self.S = S
        self.p = S.shape[0]

    def diagonal(self) -> np.ndarray:
        return np.diag(self.S).copy()

    def matmat(self, V: np.ndarray) -> np.ndarray:
        return self.S @ V

    def off_diagonal_sq(self) -> float:
        return float(np.sum(self.S**2) - np.sum(np.diag(self.S) ** 2))

    def frob_sq(self) -> float:
        return float(np.sum(self.S**2))

    def objective(self, d: np.ndarray, U: np.ndarray) -> float:
        R = self.S - U @ U.T
        R[np.diag_indices_from(R)] -= d
        return float(np.sum(R * R))


class _GramSource:
    """Σ̂ = a·X̃X̃ᵀ/n + b·I, touched only through products with X̃."""

    def __init__(self, Xs: np.ndarray, a: float = 1.0, b: float = 0.0) -> None:
        self.Xs = Xs
        self.p, self.n = Xs.shape
        self.a = a
        self.b = b
        self._frob_sq = (
            a**2 * _gram_trace_sq(Xs) / self.n**2
            + 2.0 * a * b * float(np.sum(Xs * Xs)) / self.n
            + b**2 * self.p
        )

    def diagonal(self) -> np.ndarray:
        return self.a * np.sum(self.Xs * self.Xs, axis=1) / self.n + self.b

    def matmat(self, V: np.ndarray) -> np.ndarray:
        return self.a * (self.Xs @ (self.Xs.T @ V)) / self.n + self.b * V

    def off_diagonal_sq(self) -> float:
        return self._frob_sq - float(np.sum(self.diagonal() ** 2))

    def frob_sq(self) -> float:
        return self._frob_sq

    def objective(self, d: np.ndarray, U: np.ndarray) -> float:
        # ‖Σ̂‖² − 2 tr(Σ̂(D + UUᵀ)) + ‖D + UUᵀ‖²
        XtU = self.Xs.T @ U
        cross = float(np.dot(d, self.diagonal()))
        cross += self.a * float(np.sum(XtU * XtU)) / self.n + self.b * float(np.sum(U * U))
        row_sq = np.sum(U * U, axis=1)
        UtU = U.T @ U
        model_sq = float(np.dot(d, d) + 2.0 * np.dot(d, row_sq) + np.sum(UtU * UtU))
        return max(0.0, self._frob_sq - 2.0 * cross + model_sq)


def _residual_operator(source: Union[_DenseSource, _GramSource], d: np.ndarray) -> LinearOperator:
    """Σ̂ − D as a LinearOperator."""

    def matmat(V: np.ndarray) -> np.ndarray:
        return source.matmat(V) - d[:, None] * V

    return LinearOperator(
        (source.p, source.p),
        matvec=lambda v: matmat(v.reshape(-1, 1)).ravel(),
        matmat=matmat,
        dtype=float,
    )


def _alternating_minimization(
    source: Union[_DenseSource, _GramSource],
    k: int,
    iters: int,
    rel_tol: float,
    min_diagonal: float,
) -> FactorFit:
    p = source.p
    if not 1 <= k <= p:
        raise CovarianceError(
            ErrorCode.INVALID_ARGUMENT, f"rank k must satisfy 1 <= k <= p, got k={k}, p={p}"
        )
    if iters < 1:
        raise CovarianceError(ErrorCode.INVALID_ARGUMENT, f"iters must be >= 1, got {iters}")

    diag = source.diagonal()
    if source.off_diagonal_sq() <= 1e-12 * max(source.frob_sq(), 1e-300):
        # Diagonal input: D = diag(Σ̂), U = 0 is the exact minimizer
        d = np.maximum(min_diagonal, diag)
        model = FactorModel(d=d, U=np.zeros((p, k)))
        return FactorFit(model=model, objective_history=[source.objective(d, model.U)], iterations=0)

    d = np.zeros(p)
    U = np.zeros((p, k))
    history = []
    for iteration in range(1, iters + 1):
        vectors, values = top_k_eigen(_residual_operator(source, d), k, p)
        U = vectors * np.sqrt(np.maximum(values, 0.0))
        d = np.maximum(min_diagonal, diag - np.sum(U * U, axis=1))
        objective = source.objective(d, U)
        logger.debug("Factor fit iteration %d objective=%.6g", iteration, objective)

        if history and objective > history[-1] * (1.0 + 1e-9) + 1e-12:
            logger.warning(
                "Factor fit objective increased at iteration %d: %.6g -> %.6g",
                iteration,
                history[-1],
                objective,
            )
        history.append(objective)
        if len(history) > 1 and history[-2] > 0.0:
            if (history[-2] - objective) / history[-2] < rel_tol:
                break
        if objective == 0.0:
            break

    logger.info("Fitted rank-%d factor model for p=%d in %d iterations", k, p, len(history))
    return FactorFit(model=FactorModel(d=d, U=U), objective_history=history, iterations=len(history))


def fit_factor_model(
    data: Union[np.ndarray, DataMatrix],
    k: int,
    iters: Optional[int] = None,
    rel_tol: Optional[float] = None,
    min_diagonal: Optional[float] = None,
) -> FactorFit:
    """
    Fit Σ̂ ≈ diag(d) + U Uᵀ by alternating minimization of the Frobenius error.

    Starting from D = 0, each iteration sets U from the top-k eigenpairs of
    Σ̂ − D (negative eigenvalues clipped to zero) and then
    D_ii = max(min_diagonal, Σ̂_ii − ‖U_i‖²). Both steps are exact minimizers,
    so the objective never increases.

    Args:
        data: Symmetric p×p matrix Σ̂, or a DataMatrix whose empirical
            correlation is used without being formed
        k: Rank
        iters: Iteration cap (default from settings)
        rel_tol: Early stop when the relative objective decrease is below this
        min_diagonal: Floor for d

    Returns:
        FactorFit: the model and its per-iteration objective history

    Raises:
        CovarianceError: INVALID_ARGUMENT when k > p or iters < 1
        LinalgError: when the eigensolver fails
    """
    iters = settings.factor_iters if iters is None else iters
    rel_tol = settings.factor_rel_tol if rel_tol is None else rel_tol
    min_diagonal = settings.factor_min_diagonal if min_diagonal is None else min_diagonal

    if isinstance(data, DataMatrix):
        source: Union[_DenseSource, _GramSource] = _GramSource(data.standardized())
    else:
        S = np.asarray(data, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise CovarianceError(
                ErrorCode.DIMENSION_MISMATCH, f"covariance must be square, got shape {S.shape}"
            )
        source = _DenseSource((S + S.T) / 2.0)
    return _alternating_minimization(source, k, iters, rel_tol, min_diagonal)


def shrunk_factor_model(
    X: DataLike,
    k: int,
    iters: Optional[int] = None,
    delta: Optional[float] = None,
    min_diagonal: Optional[float] = None,
) -> FactorFit:
    """
    Factor model of the Ledoit-Wolf estimate (1 − δ)Σ̂ + δμI.

    The shrinkage enters only as a scaling of the Gram products and a shift of
    the diagonal, so Σ̂ is never formed.

    Args:
        X: Data matrix
        k: Rank
        iters: Iteration cap
        delta: Force this shrinkage intensity instead of the estimated one
        min_diagonal: Floor for d
    """
    data = as_data_matrix(X)
    estimate = ledoit_wolf(data)
    if delta is not None:
        if not 0.0 <= delta <= 1.0:
            raise CovarianceError(ErrorCode.INVALID_ARGUMENT, f"delta must lie in [0, 1], got {delta}")
        estimate = estimate.model_copy(update={"delta": delta, "no_shrinkage_needed": False})

    source = _GramSource(data.standardized(), 1.0 - estimate.delta, estimate.delta * estimate.mu)
    return _alternating_minimization(
        source,
        k,
        settings.factor_iters if iters is None else iters,
        settings.factor_rel_tol,
        settings.factor_min_diagonal if min_diagonal is None else min_diagonal,
    )


POSITIVE_DIAGONAL = 1e-6


def correlation_factor_model(
    X: DataLike,
    k: int,
    shrink: bool = True,
    min_diagonal: float = POSITIVE_DIAGONAL,
    iters: Optional[int] = None,
) -> FactorFit:
    """
    Rank-k model of the (optionally shrunk) empirical correlation, rescaled to a unit diagonal.

    d is floored at ``min_diagonal`` so the result can be solved and sampled.
    The objective history is that of the fit before rescaling.
    """
    data = as_data_matrix(X)
    if shrink:
        fit = shrunk_factor_model(data, k, iters=iters, min_diagonal=min_diagonal)
    else:
        fit = fit_factor_model(data, k, iters=iters, min_diagonal=min_diagonal)
    return fit.model_copy(update={"model": fit.model.to_correlation()})
