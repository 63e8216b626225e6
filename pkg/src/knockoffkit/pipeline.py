"""pipeline: synthesize or load, estimate, solve, sample, filter and evaluate."""

import logging
from pathlib import Path
from typing import Annotated, List, Optional, Tuple

import numpy as np
import typer

from .dependencies import build_schedule, cli_errors, console, load_pipeline_config, sidecar_path
from .models.covariance import DataMatrix, FactorModel
from .models.error_models import DataError, ErrorCode
from .models.filter import Evaluation, StatisticKind
from .models.pipeline import FilterReport, PipelineConfig, SolveMetrics, SolverChoice
from .services.benchmark import DENSE_SOLVERS, trial_seed
from .services.covariance import correlation_factor_model, empirical_correlation, ledoit_wolf, shrunk_covariance
from .services.filter import evaluate, feature_statistic, knockoff_threshold
from .services.linalg import Operator
from .services.sampler import build_dense_sampler, build_factor_sampler, sample_knockoffs
from .services.sdp import solve_with
from .services.synthetic import fdr_dataset
from .storage import (
    read_indices,
    read_matrix,
    read_vector,
    write_dataset,
    write_factor_model,
    write_indices,
    write_matrix,
    write_sidecar,
    write_vector,
)

logger = logging.getLogger(__name__)


def _load_inputs(config: PipelineConfig) -> Tuple[np.ndarray, np.ndarray, Optional[List[int]], Optional[FactorModel]]:
    """Return X, y, the true support and the exact correlation model (synthetic only)."""
    out = config.output_dir
    if config.data_path is None:
        dataset = fdr_dataset(config.n, config.p, config.k, config.sparsity, config.amplitude, config.seed)
        write_dataset(out / "dataset", dataset)
        return np.asarray(dataset.X), np.asarray(dataset.y), list(dataset.support), dataset.correlation

    if config.response_path is None:
        raise DataError(ErrorCode.INVALID_ARGUMENT, "a response file is required with a data file")
    X = read_matrix(config.data_path)
    y = read_vector(config.response_path)
    truth = list(read_indices(config.truth_path)) if config.truth_path is not None else None
    return X, y, truth, None


def _covariance(
    config: PipelineConfig, X: np.ndarray, exact: Optional[FactorModel]
) -> Tuple[np.ndarray, FactorModel, Optional[Operator]]:
    """Features on the Σ scale, the factor model and the target for full and hybrid solves."""
    if config.exact_covariance:
        if exact is None:
            raise DataError(ErrorCode.INVALID_ARGUMENT, "exact covariance is only available for synthetic data")
        dense = exact.dense() if config.solver in DENSE_SOLVERS else None
        return X, exact, dense

    data = DataMatrix.from_array(X)
    Xs = data.standardized()
    model = correlation_factor_model(data, config.rank, shrink=config.shrink).model
    if config.solver in DENSE_SOLVERS:
        return Xs, model, shrunk_covariance(data) if config.shrink else empirical_correlation(data)
    if config.solver is not SolverChoice.HYBRID:
        return Xs, model, None

    # Σ̂ as a matvec, never formed
    delta = ledoit_wolf(data).delta if config.shrink else 0.0
    n = data.n

    def target(v: np.ndarray) -> np.ndarray:
        return (1.0 - delta) * (Xs @ (Xs.T @ v)) / n + delta * v

    return Xs, model, target


def run_pipeline(config: PipelineConfig) -> List[FilterReport]:
    """Run every stage, writing each artifact under ``config.output_dir``."""
    config.check_paths()
    out = config.output_dir
    X, y, truth, exact = _load_inputs(config)
    Xs, model, target = _covariance(config, X, exact)
    write_factor_model(out / "d.csv", out / "U.csv", model)

    solution = solve_with(config.solver, target, model, config.schedule, model.p)
    write_vector(out / "s.csv", solution.s)
    write_sidecar(
        sidecar_path(out / "s.csv"),
        SolveMetrics(
            solver=solution.solver.value,
            status=solution.status.value,
            objective=solution.objective,
            feasibility_margin=solution.feasibility_margin,
            cycles=solution.cycles,
            sweeps=solution.sweeps,
            wall_seconds=solution.wall_seconds,
            clamps=solution.clamps,
            gamma=solution.gamma,
        ),
    )

    if config.solver in DENSE_SOLVERS and isinstance(target, np.ndarray):
        sampler = build_dense_sampler(target, solution.s)
    else:
        sampler = build_factor_sampler(model, solution.s)

    response = y
    if config.statistic is StatisticKind.CENTROID and config.data_path is None:
        response = np.where(y > 0.0, 1.0, -1.0)

    reports = []
    for trial in range(config.trials):
        folder = out / f"trial-{trial}"
        Xt = sample_knockoffs(Xs, sampler, trial_seed(config.seed, trial))
        W = feature_statistic(config.statistic, Xs, Xt, response, folds=config.folds)
        chosen = knockoff_threshold(W, config.q, config.plus)
        report = FilterReport(
            statistic=config.statistic,
            selection=chosen,
            selected_count=len(chosen.selected),
            metadata=W.metadata,
            evaluation=evaluate(chosen, truth) if truth is not None else None,
        )
        write_matrix(folder / "knockoffs.csv", Xt)
        write_vector(folder / "W.csv", np.asarray(W.W))
        write_indices(folder / "selected.csv", chosen.selected)
        write_sidecar(folder / "selection.json", report)
        logger.info("trial %d: threshold=%.6g selected=%d", trial, chosen.threshold, len(chosen.selected))
        reports.append(report)
    return reports


def pipeline(
    config_file: Annotated[Optional[Path], typer.Option("--config", help="JSON config; flags override it")] = None,
    data: Annotated[Optional[Path], typer.Option(help="p×n data CSV; synthetic data when omitted")] = None,
    response: Annotated[Optional[Path], typer.Option(help="Response CSV for --data")] = None,
    truth: Annotated[Optional[Path], typer.Option(help="True support for --data")] = None,
    out_dir: Annotated[Optional[Path], typer.Option("--out", "-o", help="Output directory")] = None,
    rank: Annotated[Optional[int], typer.Option(help="Factor rank")] = None,
    solver: Annotated[Optional[SolverChoice], typer.Option(help="Solver")] = None,
    statistic: Annotated[Optional[StatisticKind], typer.Option(help="Feature statistic")] = None,
    q: Annotated[Optional[float], typer.Option(help="Target FDR")] = None,
    plus: Annotated[Optional[bool], typer.Option("--plus/--no-plus", help="Knockoff+ threshold")] = None,
    shrink: Annotated[Optional[bool], typer.Option("--shrink/--no-shrink", help="Ledoit-Wolf shrinkage")] = None,
    exact: Annotated[Optional[bool], typer.Option("--exact/--estimated", help="Exact covariance (synthetic)")] = None,
    folds: Annotated[Optional[int], typer.Option(help="Cross-validation folds")] = None,
    trials: Annotated[Optional[int], typer.Option(help="Knockoff draws")] = None,
    n: Annotated[Optional[int], typer.Option(help="Synthetic samples")] = None,
    p: Annotated[Optional[int], typer.Option(help="Synthetic features")] = None,
    k: Annotated[Optional[int], typer.Option(help="Synthetic generating rank")] = None,
    sparsity: Annotated[Optional[int], typer.Option(help="Synthetic nonzero coefficients")] = None,
    amplitude: Annotated[Optional[float], typer.Option(help="Synthetic amplitude")] = None,
    max_cycles: Annotated[Optional[int], typer.Option(help="Cap on barrier levels")] = None,
    seed: Annotated[Optional[int], typer.Option(help="Seed for every random draw")] = None,
) -> None:
    """Chain every stage and write all intermediate artifacts."""
    with cli_errors():
        config = load_pipeline_config(
            config_file,
            {
                "data_path": data,
                "response_path": response,
                "truth_path": truth,
                "output_dir": out_dir,
                "rank": rank,
                "solver": solver,
                "statistic": statistic,
                "q": q,
                "plus": plus,
                "shrink": shrink,
                "exact_covariance": exact,
                "folds": folds,
                "trials": trials,
                "n": n,
                "p": p,
                "k": k,
                "sparsity": sparsity,
                "amplitude": amplitude,
                "seed": seed,
            },
        )
        if max_cycles is not None:
            config = config.model_copy(update={"schedule": build_schedule(config.schedule, max_cycles=max_cycles)})
        reports = run_pipeline(config)

    scores: List[Evaluation] = [report.evaluation for report in reports if report.evaluation is not None]
    for trial, report in enumerate(reports):
        console.print(f"trial {trial}: threshold={report.selection.threshold:.6g} selected={report.selected_count}")
    if scores:
        console.print(
            f"mean fdp={np.mean([s.fdp for s in scores]):.4f} mean power={np.mean([s.power for s in scores]):.4f}"
        )
