"""Tests for the knockoff samplers."""

import numpy as np
import pytest

from knockoffkit.models.covariance import FactorModel
from knockoffkit.models.error_models import ErrorCode, SamplerError
from knockoffkit.services.sampler import (
    LdlStream,
    build_dense_sampler,
    build_factor_sampler,
    column_noise,
    conditional_mean_dense,
    conditional_mean_factor,
    iter_knockoff_rows,
    ldl_factorize,
    ldl_multiply,
    sample_knockoffs,
    sample_low_rank,
)
from knockoffkit.services.sdp import solve_equi, solve_factor
from knockoffkit.services.synthetic import draw_features

from .oracles import dense_ldl_factor, planted_model


def _negative_pivot_problem():
    """Ω = diag(C) + ZZᵀ from an equi s on a model with tiny d, so some C_j < 0."""
    rng = np.random.default_rng(31)
    raw = FactorModel(d=rng.uniform(0.001, 0.01, 30), U=rng.standard_normal((30, 2)))
    model = raw.to_correlation()
    sampler = build_factor_sampler(model, solve_equi(model).s)
    return model, sampler


def test_ldl_reconstructs_positive_diagonal(rng):
    """Test L diag(Δ) Lᵀ = diag(C) + ZZᵀ for C > 0."""
    C = rng.uniform(0.1, 1.0, 50)
    Z = rng.standard_normal((50, 4))
    factors = ldl_factorize(C, Z)
    L = dense_ldl_factor(Z, factors.B)
    target = np.diag(C) + Z @ Z.T
    assert np.linalg.norm(L @ np.diag(factors.Delta) @ L.T - target) <= 1e-10 * np.linalg.norm(target)


def test_ldl_reconstructs_negative_diagonal():
    """Test the factorization when C has negative entries."""
    _, sampler = _negative_pivot_problem()
    assert np.any(sampler.C < 0.0)
    factors = ldl_factorize(sampler.C, sampler.Z)
    L = dense_ldl_factor(np.asarray(sampler.Z), factors.B)
    target = sampler.omega()
    assert np.linalg.norm(L @ np.diag(factors.Delta) @ L.T - target) <= 1e-8 * np.linalg.norm(target)


def test_omega_matches_dense_formula():
    """Test diag(C) + ZZᵀ = 2S − SΣ⁻¹S."""
    model, sampler = _negative_pivot_problem()
    S = np.diag(sampler.s)
    expected = 2.0 * S - S @ np.linalg.solve(model.dense(), S)
    assert np.allclose(sampler.omega(), expected, atol=1e-8)


def test_ldl_rejects_indefinite():
    """Test INPUT_NOT_PSD names the row."""
    with pytest.raises(SamplerError) as excinfo:
        ldl_factorize(np.array([1.0, -1.0]), np.zeros((2, 1)))
    assert excinfo.value.code is ErrorCode.INPUT_NOT_PSD
    assert "row 1" in excinfo.value.message


def test_fused_sampler_matches_two_pass(rng):
    """Test the fused pass against factorize-then-multiply."""
    C = rng.uniform(0.1, 1.0, 40)
    Z = rng.standard_normal((40, 3))
    V = rng.standard_normal((40, 7))
    factors = ldl_factorize(C, Z)
    two_pass = ldl_multiply(Z, factors.B, factors.Delta, V)
    assert np.allclose(sample_low_rank(C, Z, V), two_pass, rtol=0.0, atol=1e-12)
    assert np.allclose(sample_low_rank(C, Z, V[:, 0]), two_pass[:, 0], rtol=0.0, atol=1e-12)


def test_row_stream_matches_compiled(rng):
    """Test the row-at-a-time stream against the compiled pass."""
    C = rng.uniform(0.1, 1.0, 25)
    Z = rng.standard_normal((25, 3))
    v = rng.standard_normal(25)
    stream = LdlStream(3)
    rows = [stream.push(float(C[j]), Z[j], float(v[j])) for j in range(25)]
    assert np.allclose(rows, sample_low_rank(C, Z, v), atol=1e-12)


def test_row_stream_block_matches_compiled():
    """Test a k×n buffer against the compiled pass, negative C included."""
    _, sampler = _negative_pivot_problem()
    V = np.random.default_rng(39).standard_normal((sampler.p, 6))
    stream = LdlStream(sampler.k, columns=6)
    rows = np.vstack([stream.push(float(sampler.C[j]), sampler.Z[j], V[j]) for j in range(sampler.p)])
    assert np.allclose(rows, sample_low_rank(sampler.C, sampler.Z, V), atol=1e-10)
    assert stream.row == sampler.p


def test_knockoff_rows_match_sample_knockoffs(rng):
    """Test that streamed rows equal the batch knockoff matrix."""
    model = planted_model(30, 3, seed=40)
    sampler = build_factor_sampler(model, solve_factor(model).s)
    X = rng.standard_normal((30, 70))
    rows = np.vstack(list(iter_knockoff_rows(X, sampler, seed=11)))
    assert rows.shape == (30, 70)
    assert np.allclose(rows, sample_knockoffs(X, sampler, seed=11), atol=1e-10)


def test_knockoff_rows_reject_infeasible():
    """Test that a negative pivot met while streaming is INFEASIBLE_S."""
    model = FactorModel(d=np.full(2, 0.2), U=np.full((2, 1), np.sqrt(0.8)))
    sampler = build_factor_sampler(model, np.ones(2))
    with pytest.raises(SamplerError) as excinfo:
        list(iter_knockoff_rows(np.ones((2, 3)), sampler, seed=0))
    assert excinfo.value.code is ErrorCode.INFEASIBLE_S
    with pytest.raises(SamplerError) as excinfo:
        next(iter_knockoff_rows(np.ones((3, 3)), sampler, seed=0))
    assert excinfo.value.code is ErrorCode.DIMENSION_MISMATCH



def test_sample_low_rank_covariance():
    """Test that L diag(√Δ) maps white noise to covariance diag(C) + ZZᵀ."""
    _, sampler = _negative_pivot_problem()
    A = sample_low_rank(sampler.C, sampler.Z, np.eye(sampler.p))
    assert np.allclose(A @ A.T, sampler.omega(), atol=1e-8)


def test_conditional_mean_factor_matches_dense(rng):
    """Test the O(pk) mean against x − SΣ⁻¹x."""
    model = planted_model(40, 3, seed=32)
    s = solve_factor(model).s
    factor = build_factor_sampler(model, s)
    dense = build_dense_sampler(model.dense(), s)
    x = rng.standard_normal((40, 5))
    assert np.allclose(conditional_mean_factor(x, factor), conditional_mean_dense(x, dense), atol=1e-10)
    assert np.allclose(conditional_mean_factor(x[:, 0], factor), conditional_mean_dense(x[:, 0], dense), atol=1e-10)


def test_zero_s_copies_originals(rng):
    """Test that s = 0 gives knockoffs equal to X exactly."""
    model = planted_model(20, 2, seed=33)
    X = rng.standard_normal((20, 9))
    for sampler in (build_dense_sampler(model.dense(), np.zeros(20)), build_factor_sampler(model, np.zeros(20))):
        assert np.array_equal(sample_knockoffs(X, sampler, seed=1), X)


def test_identity_knockoffs_are_independent_noise():
    """Test Σ = I, s = 1 draws pure noise."""
    sampler = build_dense_sampler(np.eye(3), np.ones(3))
    assert np.allclose(sampler.L_Omega, np.eye(3))
    Xt = sample_knockoffs(np.ones((3, 4)), sampler, seed=5)
    assert np.allclose(Xt, column_noise(5, range(4), 3))


def test_dense_sampler_rejects_infeasible(equicorrelated):
    """Test INFEASIBLE_S with the hybrid hint."""
    with pytest.raises(SamplerError) as excinfo:
        build_dense_sampler(equicorrelated(0.8), np.ones(2))
    assert excinfo.value.code is ErrorCode.INFEASIBLE_S
    assert "hybrid" in excinfo.value.message


@pytest.mark.parametrize("stream", [False, True])
def test_factor_sampler_rejects_infeasible(stream):
    """Test that a negative pivot of Ω surfaces as INFEASIBLE_S."""
    model = FactorModel(d=np.full(2, 0.2), U=np.full((2, 1), np.sqrt(0.8)))
    sampler = build_factor_sampler(model, np.ones(2))
    with pytest.raises(SamplerError) as excinfo:
        sample_knockoffs(np.ones((2, 3)), sampler, seed=0, stream=stream)
    assert excinfo.value.code is ErrorCode.INFEASIBLE_S
    assert "hybrid" in excinfo.value.message


def test_factor_sampler_requires_positive_diagonal():
    """Test NOT_POSITIVE_DEFINITE for d with a zero."""
    model = FactorModel(d=np.array([0.0, 0.5]), U=np.array([[1.0], [np.sqrt(0.5)]]))
    with pytest.raises(SamplerError) as excinfo:
        build_factor_sampler(model, np.zeros(2))
    assert excinfo.value.code is ErrorCode.NOT_POSITIVE_DEFINITE


def test_sampler_shape_checks(rng):
    """Test s and data shape checks."""
    model = planted_model(5, 1, seed=34)
    with pytest.raises(SamplerError) as excinfo:
        build_factor_sampler(model, np.ones(4))
    assert excinfo.value.code is ErrorCode.DIMENSION_MISMATCH
    with pytest.raises(SamplerError) as excinfo:
        build_factor_sampler(model, -np.ones(5))
    assert excinfo.value.code is ErrorCode.INVALID_ARGUMENT
    sampler = build_factor_sampler(model, np.zeros(5))
    with pytest.raises(SamplerError) as excinfo:
        sample_knockoffs(rng.standard_normal((4, 3)), sampler, seed=0)
    assert excinfo.value.code is ErrorCode.DIMENSION_MISMATCH


def test_sampling_is_deterministic(rng):
    """Test seed reproducibility and per-column independence of the noise."""
    model = planted_model(30, 3, seed=35)
    sampler = build_factor_sampler(model, solve_equi(model).s)
    X = rng.standard_normal((30, 300))
    first = sample_knockoffs(X, sampler, seed=7)
    assert np.array_equal(first, sample_knockoffs(X, sampler, seed=7))
    assert not np.allclose(first, sample_knockoffs(X, sampler, seed=8))
    assert np.allclose(sample_knockoffs(X[:, :10], sampler, seed=7), first[:, :10], atol=1e-12)
    assert np.allclose(sample_knockoffs(X, sampler, seed=7, stream=True), first, atol=1e-12)


def _joint_covariance_check(n: int, fraction: float) -> None:
    model = planted_model(20, 3, seed=36)
    Sigma = model.dense()
    s = solve_factor(model).s
    sampler = build_factor_sampler(model, s)
    X = draw_features(model, n, np.random.default_rng(37))
    Xt = sample_knockoffs(X, sampler, seed=38)

    joint = np.vstack([X, Xt])
    empirical = joint @ joint.T / n
    off = Sigma - np.diag(s)
    G = np.block([[Sigma, off], [off, Sigma]])
    variances = np.diag(G)
    stderr = np.sqrt((np.outer(variances, variances) + G**2) / n)
    within = np.abs(empirical - G) <= 3.0 * stderr
    assert within.mean() >= fraction


def test_joint_covariance_small_sample():
    """Test the joint law [[Σ, Σ − S], [Σ − S, Σ]] on a modest sample."""
    _joint_covariance_check(20_000, 0.95)


@pytest.mark.slow
def test_joint_covariance_monte_carlo():
    """Test the joint law on 2·10⁵ draws."""
    _joint_covariance_check(200_000, 0.99)
