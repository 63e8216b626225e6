"""Knockoff filter: feature statistics, threshold and evaluation."""

import logging
import warnings
from typing import Iterable, Optional

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import Lasso, LassoCV
from sklearn.model_selection import KFold

from ..config import settings
from ..models.error_models import ErrorCode, FilterError
from ..models.filter import Evaluation, LassoFit, Selection, StatisticKind, WStatistics

logger = logging.getLogger(__name__)


def _check_pair(X: np.ndarray, Xt: np.ndarray, n: int) -> None:
    if X.ndim != 2 or X.shape != Xt.shape:
        raise FilterError(
            ErrorCode.DIMENSION_MISMATCH,
            f"originals {X.shape} and knockoffs {Xt.shape} must be p×n matrices of the same shape",
        )
    if X.shape[1] != n:
        raise FilterError(
            ErrorCode.DIMENSION_MISMATCH, f"response has {n} entries but data has {X.shape[1]} samples"
        )


def lasso_coordinate_descent(
    A: np.ndarray,
    y: np.ndarray,
    lam: float,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> LassoFit:
    """
    Minimize (1/2m)‖y − Aβ‖² + λ‖β‖₁ by cyclic coordinate descent.

    Args:
        A: m×d design, columns standardized by the caller
        y: m-vector
        lam: Penalty λ ≥ 0
        tol: Relative tolerance (default from settings). The fit stops once the
            duality gap, as reported in ``dual_gap``, is at most tol·‖y‖²/m.
        max_iter: Sweep cap (default from settings)

    Returns:
        LassoFit: ``converged`` is False when the sweep cap was reached
    """
    if lam < 0.0:
        raise FilterError(ErrorCode.INVALID_ARGUMENT, f"lambda must be non-negative, got {lam}")
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    if A.shape[0] != y.size:
        raise FilterError(ErrorCode.DIMENSION_MISMATCH, f"design has {A.shape[0]} rows, y has {y.size}")

    estimator = Lasso(
        alpha=lam,
        fit_intercept=False,
        tol=settings.lasso_tol if tol is None else tol,
        max_iter=settings.lasso_max_iter if max_iter is None else max_iter,
        selection="cyclic",
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        warnings.filterwarnings("ignore", category=UserWarning)
        estimator.fit(A, y)
    converged = not any(issubclass(w.category, ConvergenceWarning) for w in caught)
    if not converged:
        logger.warning("lasso did not converge at lambda=%.3e", lam)
    return LassoFit(
        coef=estimator.coef_,
        alpha=lam,
        converged=converged,
        n_iter=int(estimator.n_iter_),
        dual_gap=float(np.ravel(estimator.dual_gap_)[0]),
    )


def _standardize_columns(A: np.ndarray) -> np.ndarray:
    centered = A - A.mean(axis=0)
    scale = centered.std(axis=0)
    scale[scale == 0.0] = 1.0
    return centered / scale


def lambda_grid(A: np.ndarray, y: np.ndarray, size: Optional[int] = None, ratio: Optional[float] = None) -> np.ndarray:
    """Log-spaced penalties from λ_max = ‖Aᵀy/m‖_∞ down to λ_max·ratio."""
    size = settings.lasso_grid_size if size is None else size
    ratio = settings.lasso_grid_ratio if ratio is None else ratio
    lam_max = float(np.max(np.abs(A.T @ y))) / A.shape[0]
    if lam_max == 0.0:
        return np.zeros(size)
    return np.geomspace(lam_max, lam_max * ratio, size)


def lcd_statistic(
    X: np.ndarray,
    Xt: np.ndarray,
    y: np.ndarray,
    folds: Optional[int] = None,
    alpha: Optional[float] = None,
) -> WStatistics:
    """
    Lasso coefficient difference W_j = |β_j| − |β_{j+p}|.

    The originals and the knockoffs are stacked into one n×2p design with
    standardized columns. The penalty is chosen by cross-validated prediction
    error over the 50-point log grid (unshuffled folds, so results are
    deterministic) unless ``alpha`` fixes it.

    Args:
        X: p×n originals
        Xt: p×n knockoffs
        y: n-vector response
        folds: Cross-validation folds (default from settings)
        alpha: Fixed penalty, skipping cross-validation
    """
    X = np.asarray(X, dtype=float)
    Xt = np.asarray(Xt, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    _check_pair(X, Xt, y.size)
    p = X.shape[0]

    design = _standardize_columns(np.vstack([X, Xt]).T)
    response = y - y.mean()
    grid = lambda_grid(design, response)
    if grid[0] == 0.0:
        return WStatistics(W=np.zeros(p), statistic_kind=StatisticKind.LCD, metadata={"alpha": 0.0})

    if alpha is None:
        folds = settings.lasso_cv_folds if folds is None else folds
        estimator = LassoCV(
            alphas=grid,
            cv=KFold(n_splits=folds, shuffle=False),
            fit_intercept=False,
            tol=settings.lasso_tol,
            max_iter=settings.lasso_max_iter,
            selection="cyclic",
            n_jobs=settings.max_threads,
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            estimator.fit(design, response)
        coef = estimator.coef_
        alpha = float(estimator.alpha_)
    else:
        coef = lasso_coordinate_descent(design, response, alpha).coef

    W = np.abs(coef[:p]) - np.abs(coef[p:])
    logger.debug("lcd statistic alpha=%.4e nonzero=%d", alpha, int(np.count_nonzero(coef)))
    return WStatistics(
        W=W,
        statistic_kind=StatisticKind.LCD,
        metadata={"alpha": alpha, "alpha_max": float(grid[0])},
    )


def centroid_statistic(X: np.ndarray, Xt: np.ndarray, labels: np.ndarray) -> WStatistics:
    """
    Centroid statistic for a two-class problem.

    Z_j = (m⁺_j − m⁻_j)² / 2 for every column of the joint 2p-feature matrix,
    where m± are class means; this is the penalty at which the penalized
    centroid pair of feature j fuses. W_j = Z_j − Z_{j+p}.

    Args:
        X: p×n originals
        Xt: p×n knockoffs
        labels: n-vector of ±1 class labels

    Raises:
        FilterError: EMPTY_CLASS if either class has no samples
    """
    X = np.asarray(X, dtype=float)
    Xt = np.asarray(Xt, dtype=float)
    labels = np.asarray(labels).ravel()
    _check_pair(X, Xt, labels.size)
    if not np.all(np.isin(labels, (-1, 1))):
        raise FilterError(ErrorCode.INVALID_ARGUMENT, "labels must be +1 or -1")
    positive = labels == 1
    if positive.all() or not positive.any():
        raise FilterError(ErrorCode.EMPTY_CLASS, "both classes need at least one sample")

    joint = np.vstack([X, Xt])
    gap = joint[:, positive].mean(axis=1) - joint[:, ~positive].mean(axis=1)
    Z = gap**2 / 2.0
    p = X.shape[0]
    return WStatistics(W=Z[:p] - Z[p:], statistic_kind=StatisticKind.CENTROID)


def knockoff_threshold(W: WStatistics, q: float, plus: bool = True) -> Selection:
    """
    Knockoff (plus=False) or knockoff+ (plus=True) threshold.

    τ is the smallest nonzero |W_j| with
    (offset + #{W ≤ −τ}) / max(1, #{W ≥ τ}) ≤ q, offset = 1 for knockoff+.
    When no candidate qualifies τ = +inf and nothing is selected.
    """
    if not 0.0 < q < 1.0:
        raise FilterError(ErrorCode.INVALID_ARGUMENT, f"q must lie in (0, 1), got {q}")
    values = np.asarray(W.W)
    ordered = np.sort(values)
    candidates = np.unique(np.abs(values[values != 0.0]))
    negatives = np.searchsorted(ordered, -candidates, side="right")
    positives = values.size - np.searchsorted(ordered, candidates, side="left")
    ratio = (int(plus) + negatives) / np.maximum(1, positives)
    passing = np.flatnonzero(ratio <= q)

    if passing.size == 0:
        return Selection(selected=(), threshold=float("inf"), q=q, plus=plus)
    tau = float(candidates[passing[0]])
    selected = tuple(int(j) for j in np.flatnonzero(values >= tau))
    return Selection(selected=selected, threshold=tau, q=q, plus=plus)


def evaluate(selection: Selection, truth: Iterable[int]) -> Evaluation:
    """False discovery proportion and power of a selection against the true support."""
    chosen = set(selection.selected)
    support = {int(j) for j in truth}
    hits = len(chosen & support)
    return Evaluation(
        fdp=(len(chosen) - hits) / max(1, len(chosen)),
        power=hits / max(1, len(support)),
    )


def feature_statistic(
    kind: StatisticKind,
    X: np.ndarray,
    Xt: np.ndarray,
    y: np.ndarray,
    folds: Optional[int] = None,
    alpha: Optional[float] = None,
) -> WStatistics:
    """Compute W with the named statistic; for ``centroid`` y holds ±1 labels."""
    if kind is StatisticKind.CENTROID:
        return centroid_statistic(X, Xt, y)
    return lcd_statistic(X, Xt, y, folds=folds, alpha=alpha)
