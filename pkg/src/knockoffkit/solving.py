"""solve: compute the knockoff s-vector."""

from pathlib import Path
from typing import Annotated, Optional

import typer

from .dependencies import build_schedule, cli_errors, console, load_covariance, sidecar_path
from .models.pipeline import SolveMetrics, SolverChoice
from .services.sdp import solve_with
from .storage import write_sidecar, write_vector


def solve(
    out: Annotated[Path, typer.Option("--out", "-o", help="s-vector CSV; metrics go to the .json next to it")],
    cov: Annotated[Optional[Path], typer.Option(help="Dense p×p covariance CSV")] = None,
    d: Annotated[Optional[Path], typer.Option("--d", help="Factor model diagonal CSV")] = None,
    u: Annotated[Optional[Path], typer.Option("--u", help="Factor model loadings CSV")] = None,
    solver: Annotated[SolverChoice, typer.Option(help="Solver")] = SolverChoice.HYBRID,
    standardize: Annotated[bool, typer.Option(help="Rescale the input to unit diagonal first")] = False,
    centered: Annotated[bool, typer.Option(help="Start from the centered schedule preset")] = False,
    lambda0: Annotated[Optional[float], typer.Option(help="Initial barrier coefficient")] = None,
    decay: Annotated[Optional[float], typer.Option(help="Barrier decay μ")] = None,
    lambda_floor: Annotated[Optional[float], typer.Option(help="Smallest barrier coefficient")] = None,
    rel_tol: Annotated[Optional[float], typer.Option(help="Relative objective tolerance per dimension")] = None,
    max_cycles: Annotated[Optional[int], typer.Option(help="Cap on barrier levels")] = None,
    inner_tol: Annotated[Optional[float], typer.Option(help="Centering tolerance per barrier level")] = None,
    max_inner_cycles: Annotated[Optional[int], typer.Option(help="Sweeps per barrier level")] = None,
    extrapolate: Annotated[
        Optional[bool], typer.Option("--extrapolate/--no-extrapolate", help="Warm-start each barrier level")
    ] = None,
) -> None:
    """
    Solve the knockoff SDP for a correlation matrix or factor model.

    hybrid solves on the factor model and rescales against --cov when given.
    """
    with cli_errors():
        Sigma, model = load_covariance(cov, d, u, standardize)
        sched = build_schedule(
            centered=centered,
            lambda0=lambda0,
            decay=decay,
            lambda_floor=lambda_floor,
            rel_tol=rel_tol,
            max_cycles=max_cycles,
            inner_tol=inner_tol,
            max_inner_cycles=max_inner_cycles,
            extrapolate=extrapolate,
        )
        solution = solve_with(solver, Sigma, model, sched)
        write_vector(out, solution.s)
        metrics = SolveMetrics(
            solver=solution.solver.value,
            status=solution.status.value,
            objective=solution.objective,
            feasibility_margin=solution.feasibility_margin,
            cycles=solution.cycles,
            sweeps=solution.sweeps,
            wall_seconds=solution.wall_seconds,
            clamps=solution.clamps,
            gamma=solution.gamma,
        )
        write_sidecar(sidecar_path(out), metrics)

    console.print(
        f"solver={metrics.solver} status={metrics.status} objective={metrics.objective:.10g} "
        f"margin={metrics.feasibility_margin:.3e} cycles={metrics.cycles} sweeps={metrics.sweeps}"
    )
