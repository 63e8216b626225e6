"""Shared command-line plumbing: consoles, logging, config merge and error exits."""

import json
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Tuple

import numpy as np
import typer
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler

from .config import settings
from .models.covariance import FactorModel
from .models.error_models import DataError, ErrorCode, KnockoffError
from .models.pipeline import PipelineConfig
from .models.sdp import BarrierSchedule
from .storage import read_factor_model, read_matrix

logger = logging.getLogger(__name__)

# results go to stdout, diagnostics to stderr
console = Console(highlight=False, soft_wrap=True)
err_console = Console(stderr=True, highlight=False, soft_wrap=True)


def configure_logging(verbose: bool = False) -> None:
    """Send library logs to stderr through rich at ``settings.log_level`` (DEBUG when verbose)."""
    level = logging.DEBUG if verbose else settings.log_level.upper()
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=False, markup=False)],
        force=True,
    )


def fail(error: KnockoffError) -> "typer.Exit":
    """Report an error on stderr and return the matching exit."""
    info = error.to_error_info()
    err_console.print_json(info.model_dump_json())
    err_console.print(f"error: {error.message}", markup=False)
    return typer.Exit(code=info.status)


@contextmanager
def cli_errors() -> Iterator[None]:
    """Turn library errors and invalid parameters into stderr diagnostics and an exit code."""
    try:
        yield
    except KnockoffError as exc:
        logger.debug("command failed", exc_info=True)
        raise fail(exc) from exc
    except ValidationError as exc:
        raise fail(DataError(ErrorCode.INVALID_ARGUMENT, str(exc))) from exc


def load_pipeline_config(config_path: Optional[Path], overrides: Dict[str, Any]) -> PipelineConfig:
    """
    Read an optional JSON config file and apply flag overrides on top.

    Flags left unset (None) keep the file value.

    Raises:
        DataError: FILE_NOT_FOUND or PARSE_ERROR for the config file
        ValidationError: when the merged values are invalid
    """
    values: Dict[str, Any] = {}
    if config_path is not None:
        if not config_path.is_file():
            raise DataError(ErrorCode.FILE_NOT_FOUND, f"file not found: {config_path}")
        try:
            values = json.loads(config_path.read_text())
        except json.JSONDecodeError as exc:
            raise DataError(ErrorCode.PARSE_ERROR, f"{config_path}:{exc.lineno}: {exc.msg}") from exc
        if not isinstance(values, dict):
            raise DataError(ErrorCode.PARSE_ERROR, f"{config_path}: expected a JSON object")
    values.update({key: value for key, value in overrides.items() if value is not None})
    return PipelineConfig.model_validate(values)


def build_schedule(base: Optional[BarrierSchedule] = None, centered: bool = False, **flags: Any) -> BarrierSchedule:
    """Schedule from settings (or the centered preset) with explicit flags applied."""
    if base is None:
        base = BarrierSchedule.centered() if centered else BarrierSchedule.from_settings()
    updates = {key: value for key, value in flags.items() if value is not None}
    return BarrierSchedule.model_validate({**base.model_dump(), **updates})


def standardize_matrix(Sigma: np.ndarray) -> np.ndarray:
    """Rescale a covariance to unit diagonal, D^{-1/2} Σ D^{-1/2}."""
    diagonal = np.diag(Sigma)
    if np.any(diagonal <= 0.0):
        raise DataError(ErrorCode.INVALID_ARGUMENT, "covariance has a non-positive diagonal entry")
    scale = 1.0 / np.sqrt(diagonal)
    R = Sigma * scale[:, None] * scale[None, :]
    np.fill_diagonal(R, 1.0)
    return R


def load_covariance(
    cov: Optional[Path],
    d: Optional[Path],
    U: Optional[Path],
    standardize: bool = False,
) -> Tuple[Optional[np.ndarray], Optional[FactorModel]]:
    """
    Read a dense covariance and/or a factor model given as d and U files.

    Raises:
        DataError: INVALID_ARGUMENT when neither is given or only one of d, U is
    """
    if (d is None) != (U is None):
        raise DataError(ErrorCode.INVALID_ARGUMENT, "a factor model needs both --d and --u")
    if cov is None and d is None:
        raise DataError(ErrorCode.INVALID_ARGUMENT, "give --cov or --d/--u")

    Sigma = read_matrix(cov) if cov is not None else None
    if Sigma is not None and (Sigma.ndim != 2 or Sigma.shape[0] != Sigma.shape[1]):
        raise DataError(ErrorCode.DIMENSION_MISMATCH, f"{cov}: covariance must be square, got {Sigma.shape}")
    model = read_factor_model(d, U) if d is not None and U is not None else None
    if Sigma is not None and model is not None and Sigma.shape[0] != model.p:
        raise DataError(
            ErrorCode.DIMENSION_MISMATCH, f"covariance has p={Sigma.shape[0]} but the model has p={model.p}"
        )
    if standardize:
        Sigma = standardize_matrix(Sigma) if Sigma is not None else None
        model = model.to_correlation() if model is not None else None
    return Sigma, model


def sidecar_path(out: Path) -> Path:
    """JSON metrics file written next to a CSV artifact."""
    return out.with_suffix(".json")
