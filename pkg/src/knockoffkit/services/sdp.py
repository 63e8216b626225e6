"""Knockoff SDP solvers.

All barrier solvers maximize 1ᵀs + λ·logdet(2Σ − diag(s)) over 0 ≤ s ≤ 1 by
cyclic coordinate ascent, decaying λ between barrier levels. Coordinates are
visited in ascending order, so every solve is deterministic.
"""

import logging
import time
from typing import Callable, List, NamedTuple, Optional, Union

import numpy as np
import scipy.linalg

from ..config import settings
from ..models.covariance import FactorModel
from ..models.error_models import ErrorCode, KnockoffError, SolverError
from ..models.pipeline import SolverChoice
from ..models.sdp import BarrierSchedule, SdpSolution, SolverTag, SolveStatus
from .linalg import (
    Operator,
    as_operator,
    low_rank_update_is_positive_definite,
    low_rank_update_min_eigenvalue,
    min_eigenvalue,
    operator_dimension,
    qr_update_arrays,
    rank_one_inplace,
    to_dense,
)

logger = logging.getLogger(__name__)

CORRELATION_TOL = 1e-8
PSD_TOL = 1e-8
SINGULAR_GAP = 1e-10
CLAMP_OFFSET = 1e-7
PULLBACK = 1e-9

Covariance = Union[np.ndarray, FactorModel]


def _check_correlation(diagonal: np.ndarray) -> None:
    worst = float(np.max(np.abs(diagonal - 1.0))) if diagonal.size else 0.0
    if worst > CORRELATION_TOL:
        raise SolverError(
            ErrorCode.NOT_CORRELATION,
            f"covariance must have a unit diagonal (largest deviation {worst:.3e}); "
            "standardize it to a correlation matrix first",
        )


def _as_correlation_matrix(Sigma: np.ndarray) -> np.ndarray:
    Sigma = np.asarray(Sigma, dtype=float)
    if Sigma.ndim != 2 or Sigma.shape[0] != Sigma.shape[1]:
        raise SolverError(ErrorCode.DIMENSION_MISMATCH, f"Σ must be square, got shape {Sigma.shape}")
    _check_correlation(np.diag(Sigma))
    return (Sigma + Sigma.T) / 2.0


def barrier_objective(Sigma: np.ndarray, s: np.ndarray, lam: float) -> float:
    """1ᵀs + λ·logdet(2Σ − diag(s)), or −inf outside the PSD cone."""
    sign, logdet = np.linalg.slogdet(2.0 * np.asarray(Sigma) - np.diag(s))
    if sign <= 0:
        return -np.inf
    return float(np.sum(s) + lam * logdet)


def check_feasibility(Sigma: Operator, s: np.ndarray, p: Optional[int] = None) -> float:
    """
    Feasibility margin λ_min(2Σ − diag(s)).

    Factor models up to ``settings.eigen_dense_max`` features are densified.
    Larger ones use the diagonal-plus-low-rank bisection, and matrix-free
    inputs go through Lanczos.

    Args:
        Sigma: Dense matrix, factor model, callable matvec or LinearOperator
        s: p-vector
        p: Dimension, required for callables

    Returns:
        float: the margin, negative when s is infeasible
    """
    s = np.asarray(s, dtype=float)
    p = operator_dimension(Sigma, p)
    if isinstance(Sigma, np.ndarray) or (isinstance(Sigma, FactorModel) and p <= settings.eigen_dense_max):
        return min_eigenvalue(2.0 * to_dense(Sigma) - np.diag(s))
    if isinstance(Sigma, FactorModel):
        return low_rank_update_min_eigenvalue(2.0 * np.asarray(Sigma.d) - s, np.sqrt(2.0) * np.asarray(Sigma.U))
    A = as_operator(Sigma, p)
    return min_eigenvalue(lambda v: 2.0 * A.matvec(v).ravel() - s * np.ravel(v), p)


def solve_equi(Sigma: Covariance) -> SdpSolution:
    """
    Equicorrelated construction s = min(1, 2λ_min(Σ))·1.

    Raises:
        SolverError: NOT_CORRELATION, or INPUT_NOT_PSD when λ_min < −1e-8
    """
    started = time.perf_counter()
    if isinstance(Sigma, FactorModel):
        _check_correlation(Sigma.diagonal())
        p = Sigma.p
    else:
        Sigma = _as_correlation_matrix(Sigma)
        p = Sigma.shape[0]

    lam_min = min_eigenvalue(Sigma)
    if lam_min < -PSD_TOL:
        raise SolverError(ErrorCode.INPUT_NOT_PSD, f"Σ is not PSD (λ_min = {lam_min:.3e})")
    value = min(1.0, 2.0 * max(lam_min, 0.0))
    s = np.full(p, value)
    solution = SdpSolution(
        s=s,
        objective=float(np.sum(s)),
        feasibility_margin=2.0 * lam_min - value,
        cycles=1,
        solver=SolverTag.EQUI,
        wall_seconds=time.perf_counter() - started,
    )
    logger.info("equi solve p=%d s=%.6g", p, value)
    return solution


def barrier_coordinate_step(Sigma: np.ndarray, s: np.ndarray, j: int, lam: float) -> float:
    """
    Exact maximizer over s_j ∈ [0, 1] of the barrier with the other coordinates fixed.

    Solves against Q_j = 2Σ_{jᶜ,jᶜ} − diag(s_{jᶜ}) directly, in O(p³).
    """
    rest = np.arange(Sigma.shape[0]) != j
    Q = 2.0 * Sigma[np.ix_(rest, rest)] - np.diag(s[rest])
    a = Sigma[rest, j]
    schur = 4.0 * a @ np.linalg.solve(Q, a) if a.size else 0.0
    return float(np.clip(2.0 * Sigma[j, j] - schur - lam, 0.0, 1.0))


class _BarrierRun(NamedTuple):
    s: np.ndarray
    cycles: int
    sweeps: int
    status: SolveStatus
    lam: float
    finished: float


def _barrier_loop(
    p: int,
    sweep: Callable[[np.ndarray, float], float],
    sched: BarrierSchedule,
    tag: SolverTag,
    on_cycle: Optional[Callable[[np.ndarray, float], None]] = None,
    restart: Optional[Callable[[np.ndarray], bool]] = None,
) -> _BarrierRun:
    """Drive sweeps over the barrier schedule.

    ``sweep`` updates s in place for one full pass at barrier level λ and
    returns the largest coordinate change. ``restart`` is offered the
    extrapolated starting point of a level; it returns False, leaving the
    solver state alone, when that point is not strictly feasible.

    The convergence test only compares two positive objectives, so a run
    still at s = 0 is never reported as converged.
    """
    s = np.zeros(p)
    cycles = sweeps = 0
    status = SolveStatus.LAMBDA_FLOOR
    previous: Optional[float] = None
    centers: List[np.ndarray] = []
    lam = sched.lambda0
    for lam in sched.levels():
        if sched.extrapolate and restart is not None and len(centers) == 2:
            guess = np.clip(centers[1] + sched.decay * (centers[1] - centers[0]), 0.0, 1.0)
            if restart(guess):
                s[:] = guess
        for _ in range(sched.max_inner_cycles):
            step = sweep(s, lam)
            sweeps += 1
            if on_cycle is not None:
                on_cycle(s, lam)
            if step <= sched.inner_tol:
                break
        cycles += 1
        centers = [*centers[-1:], s.copy()]

        objective = float(np.sum(s))
        change = np.inf
        if previous is not None and previous > 0.0 and objective > 0.0:
            change = abs(objective - previous) / previous
        logger.debug(
            "%s cycle=%d sweeps=%d lambda=%.3e objective=%.10g change=%.3e",
            tag.value,
            cycles,
            sweeps,
            lam,
            objective,
            change,
        )
        if change <= p * sched.rel_tol:
            status = SolveStatus.CONVERGED
            break
        if cycles >= sched.max_cycles:
            status = SolveStatus.MAX_CYCLES
            break
        previous = objective
    return _BarrierRun(s, cycles, sweeps, status, lam, time.perf_counter())


def _finish(tag: SolverTag, run: _BarrierRun, margin: float, started: float, clamps: int = 0) -> SdpSolution:
    s = np.clip(run.s, 0.0, 1.0)
    solution = SdpSolution(
        s=s,
        objective=float(np.sum(s)),
        feasibility_margin=margin,
        cycles=run.cycles,
        sweeps=run.sweeps,
        solver=tag,
        status=run.status,
        clamps=clamps,
        lambda_final=run.lam,
        wall_seconds=run.finished - started,
    )
    logger.info(
        "%s solve p=%d cycles=%d sweeps=%d status=%s objective=%.8g margin=%.3e wall=%.3fs",
        tag.value,
        s.size,
        run.cycles,
        run.sweeps,
        run.status.value,
        solution.objective,
        margin,
        solution.wall_seconds,
    )
    if run.status is SolveStatus.MAX_CYCLES:
        logger.warning("%s solve stopped at the cycle cap (%d)", tag.value, run.cycles)
    return solution


def _interior_check(Sigma: np.ndarray, debug: bool) -> Optional[Callable[[np.ndarray, float], None]]:
    if not debug or Sigma.shape[0] > settings.eigen_dense_threshold:
        return None

    def check(s: np.ndarray, lam: float) -> None:
        margin = float(np.linalg.eigvalsh(2.0 * Sigma - np.diag(s))[0])
        if margin <= 0.0:
            raise AssertionError(f"iterate left the interior at lambda={lam:.3e} (margin {margin:.3e})")

    return check


def _check_monotone(before: float, after: float, j: int, lam: float) -> None:
    if after < before - 1e-9 * max(1.0, abs(before)):
        raise AssertionError(
            f"barrier objective decreased at coordinate {j}, lambda={lam:.3e}: {before} -> {after}"
        )


def _require_positive_definite(Sigma: np.ndarray) -> np.ndarray:
    try:
        return scipy.linalg.cholesky(2.0 * Sigma, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise SolverError(ErrorCode.NOT_POSITIVE_DEFINITE, "Σ must be positive definite") from exc


def _cholesky_or_none(A: np.ndarray) -> Optional[np.ndarray]:
    try:
        return scipy.linalg.cholesky(A, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError:
        return None


def solve_full_naive(
    Sigma: np.ndarray,
    sched: Optional[BarrierSchedule] = None,
    debug: Optional[bool] = None,
) -> SdpSolution:
    """
    Barrier coordinate ascent with a direct solve per coordinate.

    Args:
        Sigma: p×p positive-definite correlation matrix
        sched: Barrier schedule (default from settings)
        debug: Assert barrier monotonicity after every update and strict
            feasibility after every cycle

    Returns:
        SdpSolution: tagged ``full_naive``

    Raises:
        SolverError: NOT_CORRELATION or NOT_POSITIVE_DEFINITE
    """
    started = time.perf_counter()
    sched = BarrierSchedule.from_settings() if sched is None else sched
    debug = settings.debug_checks if debug is None else debug
    Sigma = _as_correlation_matrix(Sigma)
    _require_positive_definite(Sigma)
    p = Sigma.shape[0]

    def sweep(s: np.ndarray, lam: float) -> float:
        largest = 0.0
        for j in range(p):
            before = barrier_objective(Sigma, s, lam) if debug else 0.0
            new = barrier_coordinate_step(Sigma, s, j, lam)
            largest = max(largest, abs(new - s[j]))
            s[j] = new
            if debug:
                _check_monotone(before, barrier_objective(Sigma, s, lam), j, lam)
        return largest

    def restart(guess: np.ndarray) -> bool:
        return _cholesky_or_none(2.0 * Sigma - np.diag(guess)) is not None

    run = _barrier_loop(p, sweep, sched, SolverTag.FULL_NAIVE, _interior_check(Sigma, debug), restart)
    return _finish(SolverTag.FULL_NAIVE, run, check_feasibility(Sigma, run.s), started)


def solve_full_stable(
    Sigma: np.ndarray,
    sched: Optional[BarrierSchedule] = None,
    debug: Optional[bool] = None,
) -> SdpSolution:
    """
    Barrier coordinate ascent on a Cholesky factor kept current by rank-one updates.

    With L Lᵀ = 2Σ − diag(s), each coordinate needs one forward substitution
    L x = ỹ (ỹ is column j of 2Σ with entry j zeroed), after which
    c = ζ‖x‖² / (ζ + ‖x‖²) with ζ = 2Σ_jj − s_j equals the Schur term of the
    naive update. The change of s_j is then folded into L by an update or a
    downdate with √|Δ|·e_j, for O(p²) per coordinate.

    Raises:
        SolverError: NOT_CORRELATION, NOT_POSITIVE_DEFINITE, or
            DOWNDATE_FAILURE when a downdate fails even after pulling s_j back
    """
    started = time.perf_counter()
    sched = BarrierSchedule.from_settings() if sched is None else sched
    debug = settings.debug_checks if debug is None else debug
    Sigma = _as_correlation_matrix(Sigma)
    L = np.ascontiguousarray(_require_positive_definite(Sigma))
    two_sigma = 2.0 * Sigma
    p = Sigma.shape[0]
    basis = np.zeros(p)

    def apply_change(j: int, delta: float) -> None:
        basis[j] = np.sqrt(abs(delta))
        try:
            rank_one_inplace(L, basis, -1 if delta > 0 else 1)
        finally:
            basis[j] = 0.0

    def sweep(s: np.ndarray, lam: float) -> float:
        largest = 0.0
        for j in range(p):
            before = barrier_objective(Sigma, s, lam) if debug else 0.0
            y = two_sigma[:, j].copy()
            y[j] = 0.0
            x = scipy.linalg.solve_triangular(L, y, lower=True, check_finite=False)
            norm_sq = float(x @ x)
            zeta = two_sigma[j, j] - s[j]
            c = zeta * norm_sq / (zeta + norm_sq)
            new = float(np.clip(two_sigma[j, j] - c - lam, 0.0, 1.0))
            delta = new - s[j]
            if delta == 0.0:
                continue
            if delta > 0.0:
                backup = L[j:, j:].copy()
                try:
                    apply_change(j, delta)
                except KnockoffError:
                    L[j:, j:] = backup
                    new = max(s[j], new - PULLBACK)
                    delta = new - s[j]
                    logger.debug("downdate failed at coordinate %d, retrying with pullback", j)
                    if delta > 0.0:
                        try:
                            apply_change(j, delta)
                        except KnockoffError as exc:
                            raise SolverError(
                                ErrorCode.DOWNDATE_FAILURE,
                                f"Cholesky downdate failed at coordinate {j} after pullback",
                            ) from exc
            else:
                apply_change(j, delta)
            largest = max(largest, abs(delta))
            s[j] = new
            if debug:
                _check_monotone(before, barrier_objective(Sigma, s, lam), j, lam)
        return largest

    def restart(guess: np.ndarray) -> bool:
        factor = _cholesky_or_none(two_sigma - np.diag(guess))
        if factor is None:
            return False
        L[:] = factor
        return True

    run = _barrier_loop(p, sweep, sched, SolverTag.FULL_STABLE, _interior_check(Sigma, debug), restart)
    return _finish(SolverTag.FULL_STABLE, run, check_feasibility(Sigma, run.s), started)


def solve_factor(
    model: FactorModel,
    sched: Optional[BarrierSchedule] = None,
) -> SdpSolution:
    """
    Barrier coordinate ascent for Σ = D + U Uᵀ in O(k²) per coordinate.

    With D̃ = 2D − diag(s), the solver keeps QR factors of
    I + 2M where M = Uᵀ D̃⁻¹ U. For coordinate j (z = U_j), row j is removed
    from M by a rank-one QR update with weight 2/(s_j − 2d_j), the Schur term is
    read off the updated factors, and the row is added back with weight
    2/(2d_j − s_new). The factors are rebuilt from scratch at the start of
    every sweep, at O(pk²) cost.

    When |2d_j − s_j| < 1e-10 the step is singular; s_j is clamped to
    2d_j − 1e-7 and the event is counted on the solution.

    Args:
        model: Factor model with unit diagonal and d > 0
        sched: Barrier schedule (default from settings)

    Returns:
        SdpSolution: tagged ``factor``; the margin is measured against the
        model's implied Σ
    """
    started = time.perf_counter()
    sched = BarrierSchedule.from_settings() if sched is None else sched
    _check_correlation(model.diagonal())
    if np.any(model.d <= 0.0):
        raise SolverError(ErrorCode.INVALID_ARGUMENT, "factor solver requires d > 0 elementwise")

    d = np.asarray(model.d)
    U = np.asarray(model.U)
    p, k = U.shape
    sigma_diag = model.diagonal()
    root_two_U = np.sqrt(2.0) * U
    clamps = 0

    def clamp(j: int, value: float) -> float:
        nonlocal clamps
        if abs(2.0 * d[j] - value) < SINGULAR_GAP:
            clamps += 1
            return max(0.0, 2.0 * d[j] - CLAMP_OFFSET)
        return value

    def interior(guess: np.ndarray) -> bool:
        return low_rank_update_is_positive_definite(2.0 * d - guess, root_two_U, SINGULAR_GAP)

    def sweep(s: np.ndarray, lam: float) -> float:
        d_tilde = 2.0 * d - s
        P = np.eye(k) + 2.0 * (U.T @ (U / d_tilde[:, None]))
        Q, R = scipy.linalg.qr(P)
        largest = 0.0
        for j in range(p):
            z = U[j]
            Q, R = qr_update_arrays(Q, R, 2.0 / (s[j] - 2.0 * d[j]), z)
            y = (Q @ (R @ z) - z) / 2.0
            x = scipy.linalg.solve_triangular(R, Q.T @ y, check_finite=False)
            alpha = 2.0 * sigma_diag[j] - 4.0 * float(z @ y) - lam + 8.0 * float(y @ x)
            new = clamp(j, float(np.clip(alpha, 0.0, 1.0)))
            Q, R = qr_update_arrays(Q, R, 2.0 / (2.0 * d[j] - new), z)
            largest = max(largest, abs(new - s[j]))
            s[j] = new
        return largest

    run = _barrier_loop(p, sweep, sched, SolverTag.FACTOR, restart=interior)
    if clamps:
        logger.warning("factor solve clamped %d near-singular updates", clamps)
    return _finish(SolverTag.FACTOR, run, check_feasibility(model, run.s), started, clamps)


def hybrid_rescale(
    Sigma: Operator,
    s_hat: np.ndarray,
    p: Optional[int] = None,
    tol: Optional[float] = None,
) -> SdpSolution:
    """
    Scale ŝ down until it is feasible for Σ.

    Bisection on γ ∈ [0, 1] for the largest γ with λ_min(2Σ − diag(γŝ)) ≥ 0,
    stopping once the bracket is narrower than ``tol``. The feasible end of the
    bracket is returned and entries above 1 are clipped to 1, which only
    increases the margin.

    Args:
        Sigma: Σ as a dense matrix, factor model, callable or LinearOperator
        s_hat: Non-negative p-vector, typically from ``solve_factor``
        p: Dimension, required for callables
        tol: Absolute tolerance on γ (default from settings)

    Returns:
        SdpSolution: tagged ``hybrid`` with ``gamma`` set

    Raises:
        SolverError: INVALID_ARGUMENT for negative ŝ, INPUT_NOT_PSD when even
            s = 0 is infeasible
    """
    started = time.perf_counter()
    tol = settings.bisection_tol if tol is None else tol
    s_hat = np.asarray(s_hat, dtype=float)
    p = operator_dimension(Sigma, p)
    if s_hat.shape != (p,):
        raise SolverError(ErrorCode.DIMENSION_MISMATCH, f"ŝ must have {p} entries")
    if np.any(s_hat < 0.0):
        raise SolverError(ErrorCode.INVALID_ARGUMENT, "ŝ must be non-negative")

    def margin(gamma: float) -> float:
        return check_feasibility(Sigma, gamma * s_hat, p)

    evaluations = 1
    if not np.any(s_hat > 0.0):
        gamma = 1.0
    elif margin(1.0) >= 0.0:
        gamma = 1.0
    else:
        if margin(0.0) < -PSD_TOL:
            raise SolverError(ErrorCode.INPUT_NOT_PSD, "Σ is not PSD, no rescaling is feasible")
        low, high = 0.0, 1.0
        while high - low > tol:
            middle = (low + high) / 2.0
            evaluations += 1
            if margin(middle) >= 0.0:
                low = middle
            else:
                high = middle
        gamma = low

    s = np.minimum(1.0, gamma * s_hat)
    elapsed = time.perf_counter() - started
    final_margin = check_feasibility(Sigma, s, p)
    solution = SdpSolution(
        s=s,
        objective=float(np.sum(s)),
        feasibility_margin=final_margin,
        cycles=evaluations,
        solver=SolverTag.HYBRID,
        gamma=gamma,
        wall_seconds=elapsed,
    )
    logger.info("hybrid rescale p=%d gamma=%.8f margin=%.3e", p, gamma, final_margin)
    return solution


def solve_with(
    choice: SolverChoice,
    Sigma: Optional[Operator] = None,
    model: Optional[FactorModel] = None,
    sched: Optional[BarrierSchedule] = None,
    p: Optional[int] = None,
) -> SdpSolution:
    """
    Run the named solver on whichever covariance representations are available.

    ``full`` and ``full-naive`` use Σ (densified if needed) or the model's
    dense matrix. ``factor`` needs the model. ``hybrid`` solves on the model
    and rescales against Σ when given, else against the model itself.

    Raises:
        SolverError: INVALID_ARGUMENT when the required representation is missing
    """
    if Sigma is None and model is None:
        raise SolverError(ErrorCode.INVALID_ARGUMENT, "a covariance or a factor model is required")

    if choice is SolverChoice.EQUI:
        if Sigma is None or isinstance(Sigma, np.ndarray):
            return solve_equi(model if Sigma is None else Sigma)
        return solve_equi(to_dense(Sigma, p))

    if choice in (SolverChoice.FULL, SolverChoice.FULL_NAIVE):
        dense = model.dense() if Sigma is None else to_dense(Sigma, p)
        if choice is SolverChoice.FULL_NAIVE:
            return solve_full_naive(dense, sched)
        return solve_full_stable(dense, sched)

    if model is None:
        raise SolverError(ErrorCode.INVALID_ARGUMENT, f"the {choice.value} solver needs a factor model")
    factor = solve_factor(model, sched)
    if choice is SolverChoice.FACTOR:
        return factor

    rescaled = hybrid_rescale(model if Sigma is None else Sigma, factor.s, p)
    return rescaled.model_copy(update={"wall_seconds": factor.wall_seconds + rescaled.wall_seconds, "sweeps": factor.sweeps})
