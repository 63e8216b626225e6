"""Artifact layout: dataset bundles, factor models, sidecars and bench tables."""

import csv
import logging
from pathlib import Path
from typing import Iterable, Optional, Tuple, Type, TypeVar

import numpy as np
from pydantic import BaseModel, ValidationError

from ..models.covariance import FactorModel
from ..models.error_models import DataError, ErrorCode
from ..models.pipeline import BenchRecord, SyntheticDataset
from .matrix_csv import read_indices, read_matrix, read_vector, write_indices, write_matrix, write_vector

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)

# dataset bundle members
FEATURES = "X.csv"
RESPONSE = "y.csv"
COEFFICIENTS = "beta.csv"
SUPPORT = "support.csv"
DIAGONAL = "d.csv"
LOADINGS = "V.csv"


def write_factor_model(d_path: Path, U_path: Path, model: FactorModel) -> None:
    """Write d as a p×1 CSV and U as a p×k CSV."""
    write_vector(d_path, model.d)
    write_matrix(U_path, model.U)


def read_factor_model(d_path: Path, U_path: Path) -> FactorModel:
    """
    Read a factor model written by :func:`write_factor_model`.

    Raises:
        DataError: PARSE_ERROR when the files do not describe a valid model
    """
    d = read_vector(d_path)
    U = read_matrix(U_path)
    try:
        return FactorModel(d=d, U=U)
    except ValidationError as exc:
        raise DataError(ErrorCode.PARSE_ERROR, f"invalid factor model in {d_path}, {U_path}: {exc}") from exc


def write_sidecar(path: Path, model: BaseModel) -> None:
    """Write a pydantic model as indented JSON."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2) + "\n")


def read_sidecar(path: Path, model_type: Type[ModelT]) -> ModelT:
    path = Path(path)
    if not path.is_file():
        raise DataError(ErrorCode.FILE_NOT_FOUND, f"file not found: {path}")
    try:
        return model_type.model_validate_json(path.read_text())
    except ValidationError as exc:
        raise DataError(ErrorCode.PARSE_ERROR, f"{path}: {exc}") from exc


def write_dataset(directory: Path, dataset: SyntheticDataset) -> None:
    """
    Write a synthetic dataset bundle.

    The bundle holds X (p×n), y, β, the 0-based support and the generating
    model before normalization (d and V), so either the exact or an estimated
    covariance can be used downstream.
    """
    directory.mkdir(parents=True, exist_ok=True)
    write_matrix(directory / FEATURES, dataset.X)
    write_vector(directory / RESPONSE, dataset.y)
    write_vector(directory / COEFFICIENTS, dataset.beta)
    write_indices(directory / SUPPORT, dataset.support)
    write_factor_model(directory / DIAGONAL, directory / LOADINGS, dataset.generating)
    logger.info("wrote dataset bundle to %s", directory)


def read_dataset(directory: Path) -> Tuple[np.ndarray, np.ndarray, Tuple[int, ...], FactorModel]:
    """Read X, y, the support and the generating model from a bundle."""
    X = read_matrix(directory / FEATURES)
    y = read_vector(directory / RESPONSE)
    support = tuple(read_indices(directory / SUPPORT))
    generating = read_factor_model(directory / DIAGONAL, directory / LOADINGS)
    return X, y, support, generating


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


class BenchTable:
    """Appends BenchRecord rows to a CSV that always starts with the header."""

    def __init__(self, path: Path) -> None:
        self.path = path
        self.rows = 0
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as handle:
            csv.writer(handle, lineterminator="\n").writerow(BenchRecord.header())

    def extend(self, records: Iterable[BenchRecord]) -> None:
        with self.path.open("a", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            for record in records:
                writer.writerow([_cell(getattr(record, name)) for name in BenchRecord.header()])
                self.rows += 1


def read_bench(path: Path) -> Tuple[BenchRecord, ...]:
    """Read a bench table back into records."""
    path = Path(path)
    if not path.is_file():
        raise DataError(ErrorCode.FILE_NOT_FOUND, f"file not found: {path}")
    records = []
    with path.open(newline="") as handle:
        for line_number, row in enumerate(csv.DictReader(handle), start=2):
            values: dict[str, Optional[str]] = {key: (cell or None) for key, cell in row.items()}
            try:
                records.append(BenchRecord.model_validate(values))
            except ValidationError as exc:
                raise DataError(ErrorCode.PARSE_ERROR, f"{path}:{line_number}: {exc}") from exc
    return tuple(records)
