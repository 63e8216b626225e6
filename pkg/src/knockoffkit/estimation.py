"""estimate: fit a factor model to a data matrix."""

import math
from pathlib import Path
from typing import Annotated, Optional

import typer

from .config import settings
from .dependencies import cli_errors, console
from .models.covariance import DataMatrix
from .services.covariance import correlation_factor_model, ledoit_wolf
from .storage import read_matrix, write_factor_model


def estimate(
    data: Annotated[Path, typer.Argument(help="p×n data CSV, features on rows")],
    rank: Annotated[int, typer.Option("--rank", "-k", min=1, help="Factor rank k")] = 5,
    shrink: Annotated[bool, typer.Option("--shrink/--no-shrink", help="Fit the Ledoit-Wolf estimate")] = True,
    iters: Annotated[int, typer.Option(min=1, help="Alternating minimization iterations")] = 50,
    min_diagonal: Annotated[
        Optional[float], typer.Option(min=0.0, help="Floor for d (default KNOCKOFFKIT_ESTIMATE_MIN_DIAGONAL)")
    ] = None,
    out_dir: Annotated[Path, typer.Option("--out", "-o", help="Directory for d.csv and U.csv")] = Path("."),
) -> None:
    """
    Fit Σ̂ ≈ diag(d) + U Uᵀ to the empirical correlation of the data.

    d is floored and the model rescaled to a unit diagonal, so the files feed
    ``solve --solver factor`` and the factor sampler directly, even for
    rank-deficient data. Writes d (p×1) and U (p×k) and prints the Frobenius
    residual of the fit and the shrinkage intensity δ (0 with --no-shrink).
    """
    with cli_errors():
        matrix = DataMatrix.from_array(read_matrix(data))
        floor = settings.estimate_min_diagonal if min_diagonal is None else min_diagonal
        fit = correlation_factor_model(matrix, rank, shrink=shrink, min_diagonal=floor, iters=iters)
        delta = ledoit_wolf(matrix).delta if shrink else 0.0
        write_factor_model(out_dir / "d.csv", out_dir / "U.csv", fit.model)

    console.print(f"residual={math.sqrt(max(fit.objective, 0.0)):.10g}")
    console.print(f"delta={delta:.10g}")
    console.print(f"iterations={fit.iterations}")
