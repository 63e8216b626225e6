"""Tests for settings, error types and configuration models."""

import numpy as np
import pytest
from pydantic import ValidationError

from knockoffkit.config import Settings
from knockoffkit.dependencies import build_schedule, load_pipeline_config, standardize_matrix
from knockoffkit.models.error_models import DataError, ErrorCode, SamplerError, SolverError
from knockoffkit.models.pipeline import BenchMode, BenchRecord, PipelineConfig, SolverChoice
from knockoffkit.models.sdp import BarrierSchedule


def test_settings_from_environment(monkeypatch):
    """Test KNOCKOFFKIT_ overrides."""
    monkeypatch.setenv("KNOCKOFFKIT_MAX_THREADS", "4")
    monkeypatch.setenv("KNOCKOFFKIT_BARRIER_DECAY", "0.25")
    monkeypatch.setenv("KNOCKOFFKIT_DEBUG_CHECKS", "true")
    overridden = Settings()
    assert overridden.max_threads == 4
    assert overridden.barrier_decay == 0.25
    assert overridden.debug_checks is True


def test_settings_defaults():
    defaults = Settings(_env_file=None)
    assert defaults.eigen_dense_threshold == 64
    assert defaults.lasso_grid_size == 50
    assert defaults.barrier_lambda_floor == 1e-8
    assert defaults.barrier_max_inner_cycles == 50
    assert defaults.barrier_extrapolate is True
    assert defaults.eigen_dense_max == 2000
    assert defaults.estimate_min_diagonal > 0.0


def test_error_exit_codes():
    """Test the exit code of each error family."""
    assert DataError(ErrorCode.FILE_NOT_FOUND, "x").exit_code == 4
    assert DataError(ErrorCode.PARSE_ERROR, "x").exit_code == 3
    assert SolverError(ErrorCode.INVALID_ARGUMENT, "x").exit_code == 2
    assert SamplerError(ErrorCode.INFEASIBLE_S, "x").exit_code == 1


def test_error_info():
    error = SamplerError(ErrorCode.INFEASIBLE_S, "s is outside the cone")
    info = error.to_error_info()
    assert (info.status, info.code, info.message) == (1, "INFEASIBLE_S", "s is outside the cone")
    assert str(error) == "INFEASIBLE_S: s is outside the cone"


def test_schedule_validation():
    with pytest.raises(ValidationError):
        BarrierSchedule(decay=1.0)
    with pytest.raises(ValidationError):
        BarrierSchedule(max_cycles=0)


def test_build_schedule_applies_flags():
    """Test that unset flags keep the base values."""
    sched = build_schedule(max_cycles=7, decay=None)
    assert sched.max_cycles == 7
    assert sched.decay == BarrierSchedule.from_settings().decay
    assert build_schedule(centered=True).max_inner_cycles > 1
    assert build_schedule().extrapolate


def test_pipeline_config_validation():
    """Test defaults and the sparsity check."""
    config = PipelineConfig()
    assert config.solver is SolverChoice.HYBRID
    assert config.plus
    with pytest.raises(ValidationError):
        PipelineConfig(p=10, sparsity=11)
    with pytest.raises(ValidationError):
        PipelineConfig(q=1.0)
    with pytest.raises(ValidationError):
        PipelineConfig(unknown=True)


def test_pipeline_config_paths(tmp_path):
    config = PipelineConfig(data_path=tmp_path / "X.csv", response_path=tmp_path / "y.csv")
    with pytest.raises(DataError) as excinfo:
        config.check_paths()
    assert excinfo.value.code is ErrorCode.FILE_NOT_FOUND


def test_load_pipeline_config(tmp_path):
    """Test file values, flag overrides and malformed files."""
    path = tmp_path / "config.json"
    path.write_text('{"q": 0.2, "rank": 3, "schedule": {"max_cycles": 12}}')
    config = load_pipeline_config(path, {"rank": 4, "q": None})
    assert config.q == 0.2
    assert config.rank == 4
    assert config.schedule.max_cycles == 12

    path.write_text("{not json")
    with pytest.raises(DataError) as excinfo:
        load_pipeline_config(path, {})
    assert excinfo.value.code is ErrorCode.PARSE_ERROR
    path.write_text("[1, 2]")
    with pytest.raises(DataError) as excinfo:
        load_pipeline_config(path, {})
    assert excinfo.value.code is ErrorCode.PARSE_ERROR
    with pytest.raises(DataError) as excinfo:
        load_pipeline_config(tmp_path / "absent.json", {})
    assert excinfo.value.code is ErrorCode.FILE_NOT_FOUND


def test_standardize_matrix():
    Sigma = np.array([[4.0, 1.0], [1.0, 1.0]])
    assert np.allclose(standardize_matrix(Sigma), [[1.0, 0.5], [0.5, 1.0]])
    with pytest.raises(DataError):
        standardize_matrix(np.array([[0.0, 0.0], [0.0, 1.0]]))


def test_bench_record_header():
    """Test the column order of bench tables."""
    assert BenchRecord.header()[:4] == ["mode", "p", "k", "solver"]
    with pytest.raises(ValidationError):
        BenchRecord(mode=BenchMode.SOLVER_SCALING, p=1, k=1, solver="equi", cycles=1, wall_seconds=0.0)


def test_bench_record_sweeps():
    """Test that sweeps is optional and trails the other columns."""
    record = BenchRecord(mode=BenchMode.SOLVER_SCALING, p=10, k=1, solver="factor", cycles=3, wall_seconds=0.1)
    assert record.sweeps is None
    assert BenchRecord.header()[-1] == "sweeps"
    with pytest.raises(ValidationError):
        BenchRecord(mode=BenchMode.SOLVER_SCALING, p=10, k=1, solver="factor", cycles=3, wall_seconds=0.1, sweeps=-1)
