"""Benchmark experiments: solver and sampler scaling, FDR and power sweeps.

Every row owns an RNG derived from (seed, config, trial), so rows do not depend
on how the grid is split across workers. Timings cover the core call only.
"""

import logging
import time
from collections import defaultdict
from itertools import product
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
from joblib import Parallel, delayed

from ..config import settings
from ..models.covariance import DataMatrix
from ..models.error_models import KnockoffError
from ..models.filter import StatisticKind
from ..models.pipeline import BenchMode, BenchRecord, FdrSummary, SlopeFit, SolverChoice
from ..models.sdp import BarrierSchedule
from .covariance import correlation_factor_model
from .filter import evaluate, feature_statistic, knockoff_threshold
from .sampler import build_dense_sampler, build_factor_sampler, sample_knockoffs
from .sdp import solve_equi, solve_with
from .synthetic import benchmark_model, draw_features, fdr_dataset

logger = logging.getLogger(__name__)

T = TypeVar("T")

DENSE_SOLVERS = (SolverChoice.FULL, SolverChoice.FULL_NAIVE)


def trial_seed(seed: int, *keys: int) -> int:
    """Independent 32-bit seed for one (config, trial) key."""
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def _timed(func: Callable[..., T], *args: Any, **kwargs: Any) -> Tuple[T, float]:
    started = time.perf_counter()
    result = func(*args, **kwargs)
    return result, max(time.perf_counter() - started, 1e-9)


def solver_row(
    mode: BenchMode,
    p: int,
    k: Optional[int],
    solver: SolverChoice,
    trial: int,
    seed: int,
    sched: Optional[BarrierSchedule] = None,
) -> BenchRecord:
    """
    Time one solve on the 10⁻³I + VΛVᵀ benchmark model.

    The time is the solver's own, which leaves out the eigenvalue problem behind
    the reported feasibility margin.
    """
    model = benchmark_model(p, k, trial_seed(seed, p, model_rank(p, k), trial))
    dense = model.dense() if solver in DENSE_SOLVERS else None
    solution = solve_with(solver, dense, model, sched)
    return BenchRecord(
        mode=mode,
        p=p,
        k=model.k,
        solver=solver.value,
        trial=trial,
        cycles=solution.cycles,
        sweeps=solution.sweeps or None,
        wall_seconds=max(solution.wall_seconds, 1e-9),
        objective=solution.objective,
        feasibility_margin=solution.feasibility_margin,
    )


def sampler_row(p: int, k: Optional[int], n: int, trial: int, seed: int, stream: bool = False) -> BenchRecord:
    """Time drawing n knockoff columns with the factor sampler; cycles counts columns.

    With ``stream`` the LΔLᵀ factor is rebuilt inside every column block
    instead of once, and the row is labelled ``sampler-stream``.
    """
    key = trial_seed(seed, p, model_rank(p, k), trial)
    model = benchmark_model(p, k, key)
    solution = solve_equi(model)
    sampler = build_factor_sampler(model, solution.s)
    X = draw_features(model, n, np.random.default_rng(key))
    _, wall = _timed(sample_knockoffs, X, sampler, key, stream)
    return BenchRecord(
        mode=BenchMode.SAMPLER_SCALING,
        p=p,
        k=model.k,
        solver="sampler-stream" if stream else "sampler",
        trial=trial,
        cycles=n,
        wall_seconds=wall,
        objective=solution.objective,
        feasibility_margin=solution.feasibility_margin,
    )


def fdr_rows(
    n: int,
    p: int,
    k: int,
    sparsity: int,
    amplitude: float,
    solvers: Sequence[SolverChoice],
    trials: int,
    seed: int,
    statistic: StatisticKind = StatisticKind.LCD,
    q: float = 0.1,
    plus: bool = True,
    exact_covariance: bool = True,
    sched: Optional[BarrierSchedule] = None,
    folds: Optional[int] = None,
) -> List[BenchRecord]:
    """
    FDP and power of every solver at one amplitude.

    X and β come from ``seed`` alone, so every amplitude shares them and the
    trials differ only in the knockoff draw. s is solved once per solver.
    """
    dataset = fdr_dataset(n, p, k, sparsity, amplitude, seed)
    if exact_covariance:
        model = dataset.correlation
        X = np.asarray(dataset.X)
    else:
        data = DataMatrix.from_array(dataset.X)
        model = correlation_factor_model(data, k).model
        X = data.standardized()
    response = np.asarray(dataset.y)
    if statistic is StatisticKind.CENTROID:
        response = np.where(response > 0.0, 1.0, -1.0)

    records = []
    for solver in solvers:
        dense = model.dense() if solver in DENSE_SOLVERS else None
        solution = solve_with(solver, dense, model, sched)
        if dense is None:
            sampler: Any = build_factor_sampler(model, solution.s)
        else:
            sampler = build_dense_sampler(dense, solution.s)

        for trial in range(trials):
            started = time.perf_counter()
            Xt = sample_knockoffs(X, sampler, trial_seed(seed, trial))
            W = feature_statistic(statistic, X, Xt, response, folds=folds)
            selection = knockoff_threshold(W, q, plus)
            wall = max(time.perf_counter() - started, 1e-9)
            scores = evaluate(selection, dataset.support)
            records.append(
                BenchRecord(
                    mode=BenchMode.FDR_POWER,
                    p=p,
                    k=k,
                    solver=solver.value,
                    trial=trial,
                    cycles=solution.cycles,
                    sweeps=solution.sweeps or None,
                    wall_seconds=wall,
                    objective=solution.objective,
                    feasibility_margin=solution.feasibility_margin,
                    fdp=scores.fdp,
                    power=scores.power,
                    amplitude=amplitude,
                )
            )
    logger.info("fdr-power amplitude=%g done (%d rows)", amplitude, len(records))
    return records


def model_rank(p: int, k: Optional[int]) -> int:
    return max(1, int(np.ceil(0.05 * p))) if k is None else k


def _guarded(func: Callable[..., Any], kwargs: Dict[str, Any]) -> Tuple[List[BenchRecord], Optional[str]]:
    try:
        result = func(**kwargs)
    except (KnockoffError, np.linalg.LinAlgError) as exc:
        return [], f"{func.__name__}({kwargs}) failed: {exc}"
    return (result if isinstance(result, list) else [result]), None


def _tasks(
    mode: BenchMode,
    ps: Sequence[int],
    ks: Sequence[Optional[int]],
    amplitudes: Sequence[float],
    solvers: Sequence[SolverChoice],
    trials: int,
    seed: int,
    n: int,
    options: Dict[str, Any],
) -> Iterable[Tuple[Callable[..., Any], Dict[str, Any]]]:
    if mode is BenchMode.FDR_POWER:
        for p, k, amplitude in product(ps, ks, amplitudes):
            yield fdr_rows, dict(
                n=n,
                p=p,
                k=model_rank(p, k),
                amplitude=amplitude,
                solvers=solvers,
                trials=trials,
                seed=seed,
                **options,
            )
    elif mode is BenchMode.SAMPLER_SCALING:
        for p, k, trial in product(ps, ks, range(trials)):
            yield sampler_row, dict(p=p, k=k, n=n, trial=trial, seed=seed, stream=options.get("stream", False))
    else:
        for p, k, solver, trial in product(ps, ks, solvers, range(trials)):
            yield solver_row, dict(
                mode=mode, p=p, k=k, solver=solver, trial=trial, seed=seed, sched=options.get("sched")
            )


def run_bench(
    mode: BenchMode,
    ps: Sequence[int],
    ks: Sequence[Optional[int]] = (None,),
    amplitudes: Sequence[float] = (),
    solvers: Sequence[SolverChoice] = (SolverChoice.FACTOR,),
    trials: int = 1,
    seed: int = 0,
    n: int = 100,
    n_jobs: Optional[int] = None,
    **options: Any,
) -> List[BenchRecord]:
    """
    Run a benchmark grid and return its rows in (config, trial) order.

    Failed rows are logged at ERROR and left out; the rest of the grid still runs.

    Args:
        mode: Experiment
        ps: Dimensions
        ks: Ranks; None means ⌈0.05p⌉ (or the fdr-power default)
        amplitudes: Signal amplitudes for fdr-power
        solvers: Solvers to compare (ignored by sampler-scaling)
        trials: Repetitions per configuration
        seed: Master seed
        n: Samples per dataset (fdr-power) or columns drawn (sampler-scaling)
        n_jobs: Worker count (default ``settings.max_threads``, sequential when unset)
        options: Extra keyword arguments for :func:`fdr_rows`, ``sched``, and ``stream``
            for sampler-scaling
    """
    tasks = list(_tasks(mode, ps, ks or (None,), amplitudes, solvers, trials, seed, n, options))
    if not tasks:
        return []
    jobs = n_jobs if n_jobs is not None else (settings.max_threads or 1)
    outcomes = Parallel(n_jobs=jobs)(delayed(_guarded)(func, kwargs) for func, kwargs in tasks)

    records: List[BenchRecord] = []
    for rows, failure in outcomes:
        if failure is not None:
            logger.error("%s", failure)
        records.extend(rows)
    logger.info("%s: %d rows from %d tasks", mode.value, len(records), len(tasks))
    return records


def fit_slopes(records: Iterable[BenchRecord], x: str = "p") -> List[SlopeFit]:
    """
    Least-squares slope of log(time per cycle) against log(x), one fit per solver.

    A cycle here is one coordinate sweep when the row records sweeps.

    Groups with fewer than two distinct x values are skipped.
    """
    groups: Dict[str, List[Tuple[float, float]]] = defaultdict(list)
    for record in records:
        per_cycle = record.wall_seconds / (record.sweeps or record.cycles)
        groups[record.solver].append((float(getattr(record, x)), per_cycle))

    fits = []
    for solver, points in groups.items():
        sizes = np.array([size for size, _ in points])
        if np.unique(sizes).size < 2:
            continue
        times = np.array([value for _, value in points])
        slope, intercept = np.polyfit(np.log(sizes), np.log(times), 1)
        fits.append(SlopeFit(solver=solver, x=x, slope=float(slope), intercept=float(intercept), points=len(points)))
        logger.info("%s time per cycle ~ %s^%.3f", solver, x, slope)
    return fits


def summarize_fdr(records: Iterable[BenchRecord]) -> List[FdrSummary]:
    """Mean FDP and power per (solver, amplitude), in first-seen order."""
    cells: Dict[Tuple[str, float], List[BenchRecord]] = defaultdict(list)
    for record in records:
        if record.fdp is not None and record.power is not None and record.amplitude is not None:
            cells[(record.solver, record.amplitude)].append(record)
    return [
        FdrSummary(
            solver=solver,
            amplitude=amplitude,
            trials=len(rows),
            mean_fdp=float(np.mean([row.fdp for row in rows])),
            mean_power=float(np.mean([row.power for row in rows])),
        )
        for (solver, amplitude), rows in cells.items()
    ]
