"""Headerless CSV codec for matrices, vectors and index sets.

Matrices are stored row-major with 17 significant digits so a write-then-read
cycle reproduces every double exactly. Vectors are p×1 matrices.
"""

import csv
import logging
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from ..models.error_models import DataError, ErrorCode

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".17g"


def _require(path: Path) -> None:
    if not path.is_file():
        raise DataError(ErrorCode.FILE_NOT_FOUND, f"file not found: {path}")


def write_matrix(path: Path, A: np.ndarray) -> None:
    """Write a 2-D array (or a vector as a single column)."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    write_rows(path, A)


def write_rows(path: Path, rows: Iterable[Sequence[float]]) -> Tuple[int, int]:
    """
    Write matrix rows as they arrive, so the matrix is never held whole.

    Returns:
        Tuple[int, int]: rows written and the width of the last row
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    count = width = 0
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        for row in rows:
            writer.writerow([format(float(value), FLOAT_FORMAT) for value in row])
            count += 1
            width = len(row)
    logger.debug("wrote %s shape=(%d, %d)", path, count, width)
    return count, width


def read_matrix(path: Path) -> np.ndarray:
    """
    Read a headerless numeric CSV.

    Blank lines are skipped. An empty file reads as a 0×0 matrix.

    Raises:
        DataError: FILE_NOT_FOUND, or PARSE_ERROR naming the offending line
    """
    path = Path(path)
    _require(path)
    rows: List[List[float]] = []
    width = None
    with path.open(newline="") as handle:
        for line_number, row in enumerate(csv.reader(handle), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                values = [float(cell) for cell in row]
            except ValueError as exc:
                raise DataError(
                    ErrorCode.PARSE_ERROR, f"{path}:{line_number}: not a number ({exc})"
                ) from exc
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise DataError(
                    ErrorCode.PARSE_ERROR,
                    f"{path}:{line_number}: expected {width} columns, found {len(values)}",
                )
            rows.append(values)
    if not rows:
        return np.zeros((0, 0))
    A = np.array(rows, dtype=float)
    if not np.all(np.isfinite(A)):
        bad = int(np.argwhere(~np.isfinite(A))[0][0])
        raise DataError(ErrorCode.PARSE_ERROR, f"{path}: non-finite value in data row {bad + 1}")
    return A


def write_vector(path: Path, v: np.ndarray) -> None:
    write_matrix(path, np.ravel(v))


def read_vector(path: Path) -> np.ndarray:
    """Read a single-column (or single-row) CSV as a 1-D array."""
    A = read_matrix(path)
    if A.size == 0:
        return np.zeros(0)
    if A.shape[1] != 1 and A.shape[0] != 1:
        raise DataError(ErrorCode.PARSE_ERROR, f"{path}: expected a vector, found shape {A.shape}")
    return A.ravel()


def write_indices(path: Path, indices: Iterable[int]) -> None:
    """Write one 0-based index per line; an empty set writes an empty file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerows([int(j)] for j in indices)


def read_indices(path: Path) -> Sequence[int]:
    path = Path(path)
    _require(path)
    indices: List[int] = []
    with path.open(newline="") as handle:
        for line_number, row in enumerate(csv.reader(handle), start=1):
            if not row or not row[0].strip():
                continue
            try:
                indices.append(int(row[0]))
            except ValueError as exc:
                raise DataError(
                    ErrorCode.PARSE_ERROR, f"{path}:{line_number}: not an index ({exc})"
                ) from exc
    return indices
