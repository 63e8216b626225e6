"""synth: write a synthetic regression dataset."""

from pathlib import Path
from typing import Annotated

import typer

from .dependencies import cli_errors, console
from .services.synthetic import fdr_dataset
from .storage import write_dataset


def synth(
    out_dir: Annotated[Path, typer.Option("--out", "-o", help="Bundle directory")],
    n: Annotated[int, typer.Option(min=2, help="Samples")] = 1000,
    p: Annotated[int, typer.Option(min=1, help="Features")] = 500,
    k: Annotated[int, typer.Option(min=1, help="Rank of the generating model")] = 50,
    sparsity: Annotated[int, typer.Option(min=0, help="Nonzero coefficients")] = 50,
    amplitude: Annotated[float, typer.Option(min=0.0, help="Signal amplitude")] = 4.5,
    seed: Annotated[int, typer.Option(min=0)] = 0,
) -> None:
    """
    Draw X from D + VVᵀ (normalized to unit diagonal) and y = Xᵀβ + ε.

    The bundle holds X.csv, y.csv, beta.csv, support.csv and the generating d.csv, V.csv.
    """
    with cli_errors():
        dataset = fdr_dataset(n, p, k, sparsity, amplitude, seed)
        write_dataset(out_dir, dataset)
    console.print(f"wrote n={n} p={p} k={k} sparsity={len(dataset.support)} to {out_dir}")
