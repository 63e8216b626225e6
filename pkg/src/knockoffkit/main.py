"""Command-line application for knockoffkit."""

from typing import Annotated

import typer

from . import __version__
from .benchmark import bench
from .dependencies import configure_logging, console
from .estimation import estimate
from .pipeline import pipeline
from .sampling import sample
from .selection import select
from .solving import solve
from .synthesis import synth

app = typer.Typer(
    name="knockoffkit",
    help="Gaussian model-X knockoffs: covariance estimation, SDP solvers, sampling and the knockoff filter",
    add_completion=False,
    no_args_is_help=True,
)

# Register commands, one module per stage
app.command("estimate")(estimate)
app.command("solve")(solve)
app.command("sample")(sample)
app.command("filter")(select)
app.command("synth")(synth)
app.command("bench")(bench)
app.command("pipeline")(pipeline)


def _show_version(value: bool) -> None:
    if value:
        console.print(f"knockoffkit {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Log at DEBUG level")] = False,
    version: Annotated[
        bool, typer.Option("--version", callback=_show_version, is_eager=True, help="Show the version")
    ] = False,
) -> None:
    """Gaussian model-X knockoffs at scale."""
    configure_logging(verbose)


if __name__ == "__main__":
    app()
