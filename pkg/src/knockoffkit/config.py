"""Configuration settings for knockoffkit."""

from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Library and CLI settings.

    Every field can be overridden from the environment with the
    ``KNOCKOFFKIT_`` prefix (for example ``KNOCKOFFKIT_MAX_THREADS=4``)
    or from a ``.env`` file.
    """

    model_config = SettingsConfigDict(
        env_prefix="KNOCKOFFKIT_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Logging
    log_level: str = "INFO"

    # Thread-count cap for joblib pools and cross-validation
    max_threads: Optional[int] = None

    # Eigen solvers
    eigen_dense_threshold: int = 64
    eigen_tol: float = 1e-10
    eigen_max_iter: int = 5000
    eigen_ncv: int = 40
    # Explicit matrices up to this size, and Lanczos failures up to it, go dense
    eigen_dense_max: int = 2000

    # Barrier schedule defaults
    barrier_lambda0: float = 1.0
    barrier_decay: float = 0.5
    barrier_lambda_floor: float = 1e-8
    barrier_rel_tol: float = 1e-6
    barrier_max_cycles: int = 100
    barrier_inner_tol: float = 1e-7
    barrier_max_inner_cycles: int = 50
    barrier_extrapolate: bool = True

    # Per-update monotonicity and strict-interior assertions
    debug_checks: bool = False

    # Factor model estimation
    factor_iters: int = 50
    factor_rel_tol: float = 1e-8
    factor_min_diagonal: float = 0.0
    estimate_min_diagonal: float = 1e-6

    # Hybrid rescale
    bisection_tol: float = 1e-8

    # Sampling
    zero_pivot_eps: float = 1e-12
    psd_tol: float = 1e-8

    # Lasso statistic
    lasso_grid_size: int = 50
    lasso_grid_ratio: float = 1e-3
    lasso_cv_folds: int = 5
    lasso_tol: float = 1e-7
    lasso_max_iter: int = 10000


# Global settings instance
settings = Settings()
