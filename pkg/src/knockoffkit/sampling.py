"""sample: draw model-X knockoffs for a data matrix."""

from pathlib import Path
from typing import Annotated, Optional

import typer

from .dependencies import cli_errors, console, load_covariance
from .models.error_models import DataError, ErrorCode
from .services.sampler import build_dense_sampler, build_factor_sampler, iter_knockoff_rows, sample_knockoffs
from .storage import read_matrix, read_vector, write_rows


def sample(
    data: Annotated[Path, typer.Argument(help="p×n data CSV on the scale of Σ")],
    s: Annotated[Path, typer.Option("--s", help="s-vector CSV")],
    out: Annotated[Path, typer.Option("--out", "-o", help="Knockoff CSV")],
    cov: Annotated[Optional[Path], typer.Option(help="Dense p×p covariance CSV")] = None,
    d: Annotated[Optional[Path], typer.Option("--d", help="Factor model diagonal CSV")] = None,
    u: Annotated[Optional[Path], typer.Option("--u", help="Factor model loadings CSV")] = None,
    seed: Annotated[int, typer.Option(min=0, help="Seed for the knockoff noise")] = 0,
    stream: Annotated[
        bool, typer.Option(help="Write knockoff rows as they are produced (factor model only)")
    ] = False,
) -> None:
    """
    Sample one knockoff copy of every column of the data.

    A factor model (--d/--u) uses the O(pk²) sampler; otherwise --cov is used
    densely. With --stream the factor sampler builds its LΔLᵀ factor row by row
    and each knockoff row is written as soon as it is drawn.
    """
    with cli_errors():
        X = read_matrix(data)
        svec = read_vector(s)
        Sigma, model = load_covariance(cov, d, u)
        if X.ndim != 2 or X.shape[0] != svec.size:
            raise DataError(
                ErrorCode.DIMENSION_MISMATCH, f"data has {X.shape[0]} features but s has {svec.size} entries"
            )
        if model is not None:
            sampler = build_factor_sampler(model, svec)
            if stream:
                shape = write_rows(out, iter_knockoff_rows(X, sampler, seed))
            else:
                shape = write_rows(out, sample_knockoffs(X, sampler, seed))
        else:
            if stream:
                raise DataError(ErrorCode.INVALID_ARGUMENT, "--stream needs a factor model (--d and --u)")
            shape = write_rows(out, sample_knockoffs(X, build_dense_sampler(Sigma, svec), seed))

    console.print(f"wrote {shape[0]}×{shape[1]} knockoffs to {out}")
