"""Property-based tests."""

from itertools import combinations

import numpy as np
from hypothesis import HealthCheck, given
from hypothesis import settings as hypothesis_settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from knockoffkit.models.filter import StatisticKind, WStatistics
from knockoffkit.services.filter import centroid_statistic, knockoff_threshold, lcd_statistic
from knockoffkit.services.linalg import cholesky_factor, cholesky_rank_one
from knockoffkit.services.sampler import ldl_factorize
from knockoffkit.services.sdp import check_feasibility, hybrid_rescale, solve_full_naive, solve_full_stable

from .oracles import dense_ldl_factor, planted_model, random_correlation

numerical = hypothesis_settings(
    max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)

statistics = arrays(
    np.float64,
    st.integers(min_value=1, max_value=40),
    elements=st.floats(min_value=-10.0, max_value=10.0, allow_nan=False),
)


@given(statistics, st.floats(min_value=0.01, max_value=0.98), st.floats(min_value=0.0, max_value=1.0))
def test_threshold_monotone_in_q(W, q, grow):
    """Raising q never removes a selected feature."""
    larger = q + (0.99 - q) * grow
    w = WStatistics(W=W, statistic_kind=StatisticKind.LCD)
    for plus in (True, False):
        small = set(knockoff_threshold(w, q, plus).selected)
        big = set(knockoff_threshold(w, larger, plus).selected)
        assert small <= big


@given(statistics, st.floats(min_value=0.01, max_value=0.99), st.booleans())
def test_threshold_estimate_is_controlled(W, q, plus):
    """The estimated FDP at τ is at most q and the selection is {W ≥ τ}."""
    selection = knockoff_threshold(WStatistics(W=W, statistic_kind=StatisticKind.LCD), q, plus)
    if not selection.selected:
        return
    tau = selection.threshold
    assert tau > 0.0
    estimate = (int(plus) + np.sum(W <= -tau)) / max(1, np.sum(W >= tau))
    assert estimate <= q
    assert list(selection.selected) == list(np.flatnonzero(W >= tau))


@numerical
@given(st.integers(min_value=1, max_value=20), st.integers(min_value=0, max_value=10_000))
def test_update_then_downdate_restores_factor(p, seed):
    """A rank-one update followed by the same downdate gives back L."""
    rng = np.random.default_rng(seed)
    F = cholesky_factor(random_correlation(p, seed=seed))
    v = rng.standard_normal(p)
    restored = cholesky_rank_one(cholesky_rank_one(F, v, +1), v, -1)
    assert np.linalg.norm(restored.L - F.L) <= 1e-8 * np.linalg.norm(F.L) * (1.0 + v @ v)


@numerical
@given(
    st.integers(min_value=1, max_value=60),
    st.integers(min_value=1, max_value=6),
    st.integers(min_value=0, max_value=10_000),
)
def test_ldl_reconstruction(p, k, seed):
    """L diag(Δ) Lᵀ reproduces diag(C) + ZZᵀ for C > 0."""
    rng = np.random.default_rng(seed)
    C = rng.uniform(0.05, 2.0, p)
    Z = rng.standard_normal((p, k))
    factors = ldl_factorize(C, Z)
    L = dense_ldl_factor(Z, factors.B)
    target = np.diag(C) + Z @ Z.T
    assert np.all(factors.Delta >= 0.0)
    assert np.linalg.norm(L @ np.diag(factors.Delta) @ L.T - target) <= 1e-9 * np.linalg.norm(target)


@numerical
@given(st.integers(min_value=2, max_value=10), st.integers(min_value=0, max_value=10_000))
def test_barrier_updates_are_monotone(p, seed):
    """Every coordinate update raises the barrier objective and iterates stay interior."""
    Sigma = random_correlation(p, seed=seed)
    solve_full_naive(Sigma, debug=True)
    solve_full_stable(Sigma, debug=True)


@numerical
@given(
    st.integers(min_value=3, max_value=40),
    st.integers(min_value=0, max_value=10_000),
    st.floats(min_value=0.1, max_value=5.0),
)
def test_hybrid_is_always_feasible(p, seed, scale):
    """Rescaling any non-negative ŝ lands inside the cone."""
    model = planted_model(p, min(3, p), seed=seed)
    s_hat = scale * np.random.default_rng(seed).uniform(0.0, 1.0, p)
    solution = hybrid_rescale(model, s_hat)
    assert 0.0 <= solution.gamma <= 1.0
    assert check_feasibility(model, solution.s) >= -1e-6


def test_centroid_swaps_flip_signs_exhaustively():
    """Swapping any subset of (original, knockoff) pairs negates exactly that subset of W."""
    rng = np.random.default_rng(41)
    p, n = 8, 24
    X = rng.standard_normal((p, n))
    Xt = rng.standard_normal((p, n))
    labels = np.where(np.arange(n) % 3 == 0, 1, -1)
    base = centroid_statistic(X, Xt, labels).W
    for size in range(p + 1):
        for subset in combinations(range(p), size):
            rows = list(subset)
            A, B = X.copy(), Xt.copy()
            A[rows], B[rows] = Xt[rows], X[rows]
            expected = base.copy()
            expected[rows] *= -1.0
            assert np.allclose(centroid_statistic(A, B, labels).W, expected, atol=1e-12)


def test_lcd_swaps_flip_signs():
    """Swapping pairs negates the lasso coefficient difference at a fixed penalty."""
    rng = np.random.default_rng(42)
    p, n = 4, 120
    X = rng.standard_normal((p, n))
    Xt = rng.standard_normal((p, n))
    y = X[0] - 0.8 * X[1] + 0.4 * Xt[2] + 0.5 * rng.standard_normal(n)
    base = lcd_statistic(X, Xt, y, alpha=0.02).W
    for subset in ([0], [1, 2], [0, 1, 2, 3]):
        A, B = X.copy(), Xt.copy()
        A[subset], B[subset] = Xt[subset], X[subset]
        expected = base.copy()
        expected[subset] *= -1.0
        assert np.allclose(lcd_statistic(A, B, y, alpha=0.02).W, expected, atol=5e-3)
