"""Numerical services."""

from .benchmark import fit_slopes, run_bench, summarize_fdr
from .covariance import (
    correlation_factor_model,
    empirical_correlation,
    fit_factor_model,
    ledoit_wolf,
    shrunk_covariance,
    shrunk_factor_model,
)
from .filter import (
    centroid_statistic,
    evaluate,
    feature_statistic,
    knockoff_threshold,
    lasso_coordinate_descent,
    lcd_statistic,
)
from .linalg import (
    cholesky_factor,
    cholesky_rank_one,
    min_eigenvalue,
    psd_cholesky,
    qr_factor,
    qr_rank_one,
    top_k_eigen,
    triangular_solve,
)
from .sampler import (
    build_dense_sampler,
    build_factor_sampler,
    conditional_mean_factor,
    ldl_factorize,
    ldl_multiply,
    sample_knockoffs,
    sample_low_rank,
)
from .sdp import (
    check_feasibility,
    hybrid_rescale,
    solve_equi,
    solve_factor,
    solve_full_naive,
    solve_full_stable,
    solve_with,
)
from .synthetic import benchmark_model, fdr_dataset

__all__ = [
    "benchmark_model",
    "build_dense_sampler",
    "build_factor_sampler",
    "centroid_statistic",
    "check_feasibility",
    "cholesky_factor",
    "cholesky_rank_one",
    "conditional_mean_factor",
    "correlation_factor_model",
    "empirical_correlation",
    "evaluate",
    "fdr_dataset",
    "feature_statistic",
    "fit_factor_model",
    "fit_slopes",
    "hybrid_rescale",
    "knockoff_threshold",
    "lasso_coordinate_descent",
    "lcd_statistic",
    "ldl_factorize",
    "ldl_multiply",
    "ledoit_wolf",
    "min_eigenvalue",
    "psd_cholesky",
    "qr_factor",
    "qr_rank_one",
    "run_bench",
    "sample_knockoffs",
    "sample_low_rank",
    "shrunk_covariance",
    "shrunk_factor_model",
    "solve_equi",
    "solve_factor",
    "solve_full_naive",
    "solve_full_stable",
    "solve_with",
    "summarize_fdr",
    "top_k_eigen",
    "triangular_solve",
]
