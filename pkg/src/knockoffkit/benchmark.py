"""bench: scaling and FDR/power experiments."""

import csv
from pathlib import Path
from typing import Annotated, Any, Dict, List, Optional

import typer
from pydantic import TypeAdapter
from rich.table import Table

from .dependencies import build_schedule, cli_errors, console
from .models.filter import StatisticKind
from .models.pipeline import BenchMode, FdrSummary, SlopeFit, SolverChoice
from .services.benchmark import fit_slopes, run_bench, summarize_fdr
from .storage import BenchTable


def _write_summary(path: Path, summary: List[FdrSummary]) -> None:
    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(FdrSummary.model_fields), lineterminator="\n")
        writer.writeheader()
        writer.writerows(row.model_dump() for row in summary)


def _show_summary(summary: List[FdrSummary]) -> None:
    table = Table(title="FDR and power")
    for column in ("solver", "amplitude", "trials", "mean FDP", "mean power"):
        table.add_column(column)
    for row in summary:
        table.add_row(row.solver, f"{row.amplitude:g}", str(row.trials), f"{row.mean_fdp:.4f}", f"{row.mean_power:.4f}")
    console.print(table)


def bench(
    mode: Annotated[BenchMode, typer.Argument(help="Experiment")],
    out: Annotated[Path, typer.Option("--out", "-o", help="Bench CSV")],
    p: Annotated[Optional[List[int]], typer.Option("--p", help="Dimension grid (repeatable)")] = None,
    k: Annotated[Optional[List[int]], typer.Option("--k", help="Rank grid (repeatable); default ⌈0.05p⌉")] = None,
    amplitude: Annotated[Optional[List[float]], typer.Option("--amplitude", help="Amplitude grid (fdr-power)")] = None,
    solver: Annotated[Optional[List[SolverChoice]], typer.Option("--solver", help="Solvers (repeatable)")] = None,
    trials: Annotated[int, typer.Option(min=1)] = 1,
    n: Annotated[int, typer.Option(min=2, help="Samples (fdr-power) or columns drawn (sampler-scaling)")] = 100,
    sparsity: Annotated[int, typer.Option(min=0, help="Nonzero coefficients (fdr-power)")] = 30,
    statistic: Annotated[StatisticKind, typer.Option(help="Feature statistic (fdr-power)")] = StatisticKind.LCD,
    q: Annotated[float, typer.Option(min=0.0, max=1.0, help="Target FDR")] = 0.1,
    exact: Annotated[bool, typer.Option("--exact/--estimated", help="Exact or estimated covariance")] = True,
    max_cycles: Annotated[Optional[int], typer.Option(help="Cap on barrier levels")] = None,
    stream: Annotated[bool, typer.Option("--stream/--no-stream", help="Refactor per column block (sampler-scaling)")] = False,
    seed: Annotated[int, typer.Option(min=0)] = 0,
    jobs: Annotated[Optional[int], typer.Option(min=1, help="Workers; default KNOCKOFFKIT_MAX_THREADS")] = None,
) -> None:
    """
    Run a benchmark grid and write one row per (config, trial).

    Scaling modes also write <out>.slope.json (log-log slope of time per cycle
    against p, or k for rank-scaling). fdr-power also writes <out>.summary.csv
    with mean FDP and power per solver and amplitude.
    """
    with cli_errors():
        table = BenchTable(out)
        solvers = solver or [SolverChoice.FACTOR]
        options: Dict[str, Any] = {"sched": build_schedule(max_cycles=max_cycles)}
        if mode is BenchMode.FDR_POWER:
            options.update(sparsity=sparsity, statistic=statistic, q=q, exact_covariance=exact)
        elif mode is BenchMode.SAMPLER_SCALING:
            options["stream"] = stream
        records = run_bench(
            mode,
            ps=p or [],
            ks=k or [None],
            amplitudes=amplitude or [],
            solvers=solvers,
            trials=trials,
            seed=seed,
            n=n,
            n_jobs=jobs,
            **options,
        )
        table.extend(records)

        if mode is BenchMode.FDR_POWER:
            summary = summarize_fdr(records)
            _write_summary(out.with_suffix(".summary.csv"), summary)
            _show_summary(summary)
        elif records:
            fits = fit_slopes(records, "k" if mode is BenchMode.RANK_SCALING else "p")
            out.with_suffix(".slope.json").write_bytes(TypeAdapter(List[SlopeFit]).dump_json(fits, indent=2))
            for fit in fits:
                console.print(f"{fit.solver}: slope={fit.slope:.4f} over {fit.points} points ({fit.x})")

    console.print(f"wrote {table.rows} rows to {out}")
