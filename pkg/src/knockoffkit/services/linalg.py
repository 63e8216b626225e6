"""Structured dense linear algebra used by every other service."""

import logging
from typing import Callable, Optional, Tuple, Union

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, aslinearoperator, eigsh

from ..config import settings
from ..models.covariance import FactorModel
from ..models.error_models import ErrorCode, LinalgError
from ..models.linalg import LowerTriangularFactor, QRFactors
from . import kernels

logger = logging.getLogger(__name__)

Operator = Union[np.ndarray, FactorModel, LinearOperator, Callable[[np.ndarray], np.ndarray]]

SINGULAR_PIVOT = 1e-12


def cholesky_factor(A: np.ndarray) -> LowerTriangularFactor:
    """
    Factor a symmetric positive-definite matrix.

    Args:
        A: Symmetric positive-definite p×p matrix

    Returns:
        LowerTriangularFactor: L with L Lᵀ = A

    Raises:
        LinalgError: NOT_POSITIVE_DEFINITE if a pivot is not positive
    """
    A = np.asarray(A, dtype=float)
    try:
        L = scipy.linalg.cholesky(A, lower=True, check_finite=True)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise LinalgError(
            ErrorCode.NOT_POSITIVE_DEFINITE, f"matrix is not positive definite ({exc})"
        ) from exc
    if np.any(np.diag(L) <= 0.0):
        raise LinalgError(ErrorCode.NOT_POSITIVE_DEFINITE, "matrix is not positive definite")
    return LowerTriangularFactor(L=L)


def rank_one_inplace(L: np.ndarray, v: np.ndarray, sign: int) -> None:
    """Apply L Lᵀ ± v vᵀ to a writable factor in place.

    Raises:
        LinalgError: DOWNDATE_FAILURE when a downdate loses definiteness
    """
    x = np.array(v, dtype=float, copy=True)
    nonzero = np.flatnonzero(x)
    if nonzero.size == 0:
        return
    status = kernels.chol_rank_one(L, x, float(sign), int(nonzero[0]))
    if status:
        raise LinalgError(
            ErrorCode.DOWNDATE_FAILURE,
            f"rank-one downdate lost positive definiteness at column {status - 1}",
        )


def cholesky_rank_one(F: LowerTriangularFactor, v: np.ndarray, sign: int) -> LowerTriangularFactor:
    """
    Rank-one update (sign=+1) or downdate (sign=-1) of a Cholesky factor in O(p²).

    Args:
        F: Current factor of A
        v: p-vector
        sign: +1 or -1

    Returns:
        LowerTriangularFactor: factor of A + sign·v vᵀ

    Raises:
        LinalgError: DOWNDATE_FAILURE if A − v vᵀ is not positive definite
    """
    if sign not in (1, -1):
        raise LinalgError(ErrorCode.INVALID_ARGUMENT, f"sign must be +1 or -1, got {sign}")
    v = np.asarray(v, dtype=float)
    if v.shape != (F.p,):
        raise LinalgError(ErrorCode.DIMENSION_MISMATCH, f"v must have {F.p} entries")
    L = np.array(F.L, copy=True, order="C")
    rank_one_inplace(L, v, sign)
    return LowerTriangularFactor(L=L)


def triangular_solve(F: LowerTriangularFactor, y: np.ndarray) -> np.ndarray:
    """Forward substitution: return x with L x = y."""
    return scipy.linalg.solve_triangular(F.L, y, lower=True, check_finite=False)


def qr_factor(A: np.ndarray) -> QRFactors:
    """QR factors of a square matrix."""
    Q, R = scipy.linalg.qr(np.asarray(A, dtype=float))
    return QRFactors(Q=Q, R=R)


def qr_update_arrays(
    Q: np.ndarray, R: np.ndarray, c: float, z: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Return factors of Q R + c·z zᵀ using Givens rotations in O(k²).

    Raises:
        LinalgError: SINGULAR_UPDATE if the updated R has a pivot below 1e-12
    """
    Q1, R1 = scipy.linalg.qr_update(Q, R, c * z, z, check_finite=False)
    if np.min(np.abs(np.diag(R1))) < SINGULAR_PIVOT:
        raise LinalgError(ErrorCode.SINGULAR_UPDATE, "rank-one QR update is numerically singular")
    return Q1, R1


def qr_rank_one(F: QRFactors, c: float, z: np.ndarray) -> QRFactors:
    """
    Rank-one update of QR factors.

    Args:
        F: Current factors
        c: Scalar weight
        z: k-vector

    Returns:
        QRFactors: factors of Q R + c·z zᵀ
    """
    z = np.asarray(z, dtype=float)
    if z.shape != (F.k,):
        raise LinalgError(ErrorCode.DIMENSION_MISMATCH, f"z must have {F.k} entries")
    Q1, R1 = qr_update_arrays(F.Q, F.R, float(c), z)
    return QRFactors(Q=Q1, R=R1)


def as_operator(op: Operator, p: Optional[int] = None) -> LinearOperator:
    """Wrap a dense matrix, factor model, callable or LinearOperator as a LinearOperator."""
    if isinstance(op, LinearOperator):
        return op
    if isinstance(op, FactorModel):
        model = op
        return LinearOperator((op.p, op.p), matvec=lambda v: model.matvec(np.ravel(v)), dtype=float)
    if isinstance(op, np.ndarray):
        return aslinearoperator(np.asarray(op, dtype=float))
    if callable(op):
        if p is None:
            raise LinalgError(ErrorCode.INVALID_ARGUMENT, "dimension p is required for a callable")
        func = op
        return LinearOperator((p, p), matvec=lambda v: np.ravel(func(np.ravel(v))), dtype=float)
    raise LinalgError(ErrorCode.INVALID_ARGUMENT, f"cannot use {type(op).__name__} as an operator")


def operator_dimension(op: Operator, p: Optional[int] = None) -> int:
    if p is not None:
        return p
    if isinstance(op, FactorModel):
        return op.p
    if isinstance(op, (np.ndarray, LinearOperator)):
        return int(op.shape[0])
    raise LinalgError(ErrorCode.INVALID_ARGUMENT, "dimension p is required for a callable")


def to_dense(op: Operator, p: Optional[int] = None) -> np.ndarray:
    """Materialize an operator as a symmetric dense matrix."""
    if isinstance(op, FactorModel):
        return op.dense()
    if isinstance(op, np.ndarray):
        return np.asarray(op, dtype=float)
    linear = as_operator(op, p)
    dense = linear.matmat(np.eye(linear.shape[0]))
    return (dense + dense.T) / 2.0


def _use_dense(p: int, k: int = 1) -> bool:
    return p <= settings.eigen_dense_threshold or k >= p - 1


def _start_vector(p: int) -> np.ndarray:
    return np.random.default_rng(0).standard_normal(p)


def _eigsh(op: LinearOperator, k: int, which: str) -> Tuple[np.ndarray, np.ndarray]:
    p = op.shape[0]
    try:
        return eigsh(
            op,
            k=k,
            which=which,
            ncv=min(p, max(2 * k + 1, settings.eigen_ncv)),
            tol=settings.eigen_tol,
            maxiter=settings.eigen_max_iter,
            v0=_start_vector(p),
        )
    except ArpackNoConvergence as exc:
        raise LinalgError(
            ErrorCode.EIGENSOLVER_NOT_CONVERGED,
            f"Lanczos did not converge within {settings.eigen_max_iter} iterations",
        ) from exc


def min_eigenvalue(op: Operator, p: Optional[int] = None) -> float:
    """
    Smallest eigenvalue of a symmetric operator.

    Small problems use a dense eigendecomposition. Larger ones run Lanczos on
    the shifted operator σI − A, whose largest-magnitude eigenvalue is σ − λ_min
    once σ bounds the spectrum from above.

    Dense arrays with p ≤ ``settings.eigen_dense_max`` are always decomposed
    directly. Other operators up to that size are densified when Lanczos does
    not converge.

    Args:
        op: Symmetric matrix, factor model, callable matvec or LinearOperator
        p: Dimension, required for callables

    Returns:
        float: λ_min(A)

    Raises:
        LinalgError: EIGENSOLVER_NOT_CONVERGED
    """
    p = operator_dimension(op, p)
    if _use_dense(p) or (isinstance(op, np.ndarray) and p <= settings.eigen_dense_max):
        return _dense_min_eigenvalue(op, p)
    try:
        return _lanczos_min_eigenvalue(as_operator(op, p), p)
    except LinalgError:
        if p > settings.eigen_dense_max:
            raise
        logger.warning("Lanczos min eigenvalue failed for p=%d, using a dense eigendecomposition", p)
        return _dense_min_eigenvalue(op, p)


def _dense_min_eigenvalue(op: Operator, p: int) -> float:
    return float(scipy.linalg.eigvalsh(to_dense(op, p), subset_by_index=[0, 0])[0])


def _lanczos_min_eigenvalue(A: LinearOperator, p: int) -> float:
    top = float(_eigsh(A, 1, "LA")[0][0])
    sigma = top + 1e-6 * max(1.0, abs(top))
    shifted = LinearOperator((p, p), matvec=lambda v: sigma * v - A.matvec(v), dtype=float)
    largest = float(_eigsh(shifted, 1, "LM")[0][0])
    logger.debug("Lanczos min eigenvalue p=%d sigma=%.6g lambda_min=%.6g", p, sigma, sigma - largest)
    return sigma - largest


def low_rank_update_is_positive_definite(diagonal: np.ndarray, V: np.ndarray, gap: float = 0.0) -> bool:
    """
    Whether diag(e) + VVᵀ is positive definite, in O(pk²).

    With E = diag(e) invertible, the inertia of E + VVᵀ adds to that of −I
    the same way the inertia of E adds to that of −(I + VᵀE⁻¹V), these being
    the two Schur complements of [[E, V], [Vᵀ, −I]]. The matrix is therefore
    positive definite exactly when I + VᵀE⁻¹V has as many negative
    eigenvalues as e has negative entries. Entries of e and eigenvalues within
    ``gap`` of zero count as singular.
    """
    e = np.asarray(diagonal, dtype=float)
    if np.any(np.abs(e) <= gap):
        return False
    capacitance = np.eye(V.shape[1]) + V.T @ (V / e[:, None])
    eigenvalues = np.linalg.eigvalsh((capacitance + capacitance.T) / 2.0)
    if np.any(np.abs(eigenvalues) <= gap):
        return False
    return int(np.sum(eigenvalues < 0.0)) == int(np.sum(e < 0.0))


def low_rank_update_min_eigenvalue(diagonal: np.ndarray, V: np.ndarray, tol: Optional[float] = None) -> float:
    """
    Smallest eigenvalue of diag(e) + VVᵀ in O(pk²) per bisection step.

    λ_min lies between the smallest and the (k+1)-th smallest entry of e.
    The shift σ is bisected in that bracket, testing diag(e − σ) + VVᵀ with
    :func:`low_rank_update_is_positive_definite`.

    Args:
        diagonal: p-vector e, any sign
        V: p×k factor
        tol: Absolute width of the final bracket (default scales
            ``settings.eigen_tol`` by max|e|)

    Returns:
        float: the lower end of the final bracket
    """
    e = np.asarray(diagonal, dtype=float)
    V = np.asarray(V, dtype=float)
    p, k = V.shape
    if k == 0:
        return float(np.min(e))
    if k >= p:
        return _dense_min_eigenvalue(np.diag(e) + V @ V.T, p)
    ordered = np.sort(e)
    low, high = float(ordered[0]), float(ordered[k])
    tol = settings.eigen_tol * max(1.0, float(np.max(np.abs(e)))) if tol is None else tol

    steps = 0
    while high - low > tol:
        middle = (low + high) / 2.0
        if middle in (low, high):
            break
        if low_rank_update_is_positive_definite(e - middle, V):
            low = middle
        else:
            high = middle
        steps += 1
    logger.debug("low-rank min eigenvalue p=%d k=%d steps=%d lambda_min=%.6g", p, k, steps, low)
    return low


def top_k_eigen(op: Operator, k: int, p: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Top-k eigenpairs of a symmetric operator, eigenvalues in decreasing order.

    Each eigenvector's largest-magnitude entry is made positive so results are
    reproducible.

    Returns:
        Tuple[np.ndarray, np.ndarray]: eigenvectors (p×k) and eigenvalues (k)
    """
    p = operator_dimension(op, p)
    if not 1 <= k <= p:
        raise LinalgError(ErrorCode.INVALID_ARGUMENT, f"k must satisfy 1 <= k <= p, got k={k}, p={p}")

    if _use_dense(p, k):
        values, vectors = scipy.linalg.eigh(to_dense(op, p))
        values, vectors = values[::-1][:k], vectors[:, ::-1][:, :k]
    else:
        values, vectors = _eigsh(as_operator(op, p), k, "LA")
        order = np.argsort(values)[::-1]
        values, vectors = values[order], vectors[:, order]

    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(k)])
    signs[signs == 0.0] = 1.0
    return vectors * signs, values


def psd_cholesky(A: np.ndarray, tol: Optional[float] = None) -> np.ndarray:
    """
    Lower-triangular factor of a positive semi-definite matrix.

    Pivots within ``tol`` of zero (relative to the largest diagonal entry)
    yield zero columns, so singular matrices factor as well.

    Raises:
        LinalgError: NOT_POSITIVE_DEFINITE if a pivot is below −tol
    """
    A = np.asarray(A, dtype=float)
    p = A.shape[0]
    tol = settings.psd_tol if tol is None else tol
    scale = max(1.0, float(np.max(np.abs(np.diag(A))))) if p else 1.0
    L = np.zeros_like(A)
    for j in range(p):
        pivot = A[j, j] - L[j, :j] @ L[j, :j]
        if pivot < -tol * scale:
            raise LinalgError(
                ErrorCode.NOT_POSITIVE_DEFINITE,
                f"matrix is not positive semi-definite (pivot {pivot:.3e} at {j})",
            )
        if pivot <= tol * scale:
            continue
        root = np.sqrt(pivot)
        L[j, j] = root
        L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / root
    return L
