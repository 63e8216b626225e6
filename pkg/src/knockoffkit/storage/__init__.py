"""Artifact persistence: CSV matrices, bundles, sidecars and bench tables."""

from .bundle import (
    BenchTable,
    read_bench,
    read_dataset,
    read_factor_model,
    read_sidecar,
    write_dataset,
    write_factor_model,
    write_sidecar,
)
from .matrix_csv import (
    read_indices,
    read_matrix,
    read_vector,
    write_indices,
    write_matrix,
    write_rows,
    write_vector,
)

__all__ = [
    "BenchTable",
    "read_bench",
    "read_dataset",
    "read_factor_model",
    "read_indices",
    "read_matrix",
    "read_sidecar",
    "read_vector",
    "write_dataset",
    "write_factor_model",
    "write_indices",
    "write_matrix",
    "write_rows",
    "write_sidecar",
    "write_vector",
]
