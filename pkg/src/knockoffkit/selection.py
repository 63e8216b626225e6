"""filter: knockoff statistics and selection."""

from pathlib import Path
from typing import Annotated, Optional

import numpy as np
import typer

from .dependencies import cli_errors, console
from .models.filter import StatisticKind
from .models.pipeline import FilterReport
from .services.filter import evaluate, feature_statistic, knockoff_threshold
from .storage import read_indices, read_matrix, read_vector, write_indices, write_sidecar, write_vector


def select(
    data: Annotated[Path, typer.Argument(help="p×n originals CSV")],
    knockoffs: Annotated[Path, typer.Argument(help="p×n knockoffs CSV")],
    response: Annotated[Path, typer.Argument(help="n-vector response CSV (±1 labels for centroid)")],
    statistic: Annotated[StatisticKind, typer.Option(help="Feature statistic")] = StatisticKind.LCD,
    q: Annotated[float, typer.Option(min=0.0, max=1.0, help="Target FDR")] = 0.1,
    plus: Annotated[bool, typer.Option("--plus/--no-plus", help="Use the knockoff+ threshold")] = True,
    folds: Annotated[Optional[int], typer.Option(min=2, help="Cross-validation folds (lcd)")] = None,
    alpha: Annotated[Optional[float], typer.Option(min=0.0, help="Fixed lasso penalty, skips CV")] = None,
    truth: Annotated[Optional[Path], typer.Option(help="True support, one 0-based index per line")] = None,
    out_dir: Annotated[Path, typer.Option("--out", "-o", help="Directory for W.csv, selected.csv, selection.json")] = Path("."),
) -> None:
    """
    Compute W, the knockoff threshold and the selected features.

    Writes W.csv, selected.csv (0-based indices) and selection.json with τ and,
    given --truth, the FDP and power.
    """
    with cli_errors():
        X = read_matrix(data)
        Xt = read_matrix(knockoffs)
        y = read_vector(response)
        W = feature_statistic(statistic, X, Xt, y, folds=folds, alpha=alpha)
        chosen = knockoff_threshold(W, q, plus)
        report = FilterReport(
            statistic=statistic,
            selection=chosen,
            selected_count=len(chosen.selected),
            metadata=W.metadata,
            evaluation=evaluate(chosen, read_indices(truth)) if truth is not None else None,
        )
        write_vector(out_dir / "W.csv", np.asarray(W.W))
        write_indices(out_dir / "selected.csv", chosen.selected)
        write_sidecar(out_dir / "selection.json", report)

    console.print(f"threshold={chosen.threshold:.10g} selected={len(chosen.selected)}")
    if report.evaluation is not None:
        console.print(f"fdp={report.evaluation.fdp:.6g} power={report.evaluation.power:.6g}")
