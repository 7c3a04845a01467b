import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.covariance import ledoit_wolf

from ridgelet.covariance import (
    DEFAULT_C1_GRID,
    PoetDecomposition,
    eigenvalue_ratio_r,
    fold_blocks,
    linear_shrinkage,
    poet,
    poet_cv_c1,
    poet_rate,
    repair_pd,
    ridge_augment,
    sample_cov,
)
from ridgelet.dgp import build_setting2, sample_returns
from ridgelet.errors import DegenerateFactorCount, InvalidInput
from ridgelet.linalg import is_positive_definite, sym_eigen
from ridgelet.weights import ridgelet2_from_cov


def test_sample_cov_examples(rng):
    assert np.allclose(sample_cov([[1.0, -1.0]]), [[1.0]])
    assert np.allclose(sample_cov(np.eye(2)), np.diag([0.5, 0.5]))
    r = rng.standard_normal((4, 10))
    brute = sum(np.outer(r[:, t], r[:, t]) for t in range(10)) / 10
    assert np.abs(sample_cov(r) - brute).max() <= 1e-12 * np.abs(brute).max()


def test_sample_cov_demean(rng):
    r = rng.standard_normal((3, 8)) + 5.0
    c = r - r.mean(axis=1, keepdims=True)
    assert np.allclose(sample_cov(r, demean=True), c @ c.T / 8)


def test_sample_cov_rejects_empty():
    with pytest.raises(InvalidInput):
        sample_cov(np.zeros((0, 3)))


def test_ridge_augment_examples(rng):
    assert np.allclose(ridge_augment(np.zeros((3, 3)), 1e-8), 1e-8 * np.eye(3))
    r = rng.standard_normal((6, 3))
    s0 = sample_cov(r)
    out = ridge_augment(s0, 0.1)
    assert np.isclose(np.linalg.eigvalsh(out)[0], np.linalg.eigvalsh(s0)[0] + 0.1)
    omega = np.diag(rng.uniform(0.5, 2, 6))
    aug = ridge_augment(s0, 1e-8, omega)
    assert np.array_equal(aug, aug.T)
    assert is_positive_definite(aug)


def test_ridge_augment_rejects_nonpositive_tau():
    for tau in (0.0, -1.0):
        with pytest.raises(InvalidInput):
            ridge_augment(np.eye(2), tau)


def test_ridge_identity_preserves_eigenvectors(rng):
    s0 = sample_cov(rng.standard_normal((8, 20)))
    a, b = sym_eigen(s0), sym_eigen(ridge_augment(s0, 0.3))
    assert np.allclose(b.eigenvalues, a.eigenvalues + 0.3)
    # Align signs column by column before comparing subspaces.
    overlap = np.abs(np.sum(a.eigenvectors * b.eigenvectors, axis=0))
    assert np.all(np.abs(overlap - 1) <= 1e-8)


@pytest.mark.parametrize(
    "eigs, r_max, expected",
    [((100, 1, 0.9, 0.8), 3, 1), ((10, 9, 1, 0.5), 3, 2), ((5, 5, 5, 5), 3, 1), ((3, 2, 0, 0), 3, 2)],
)
def test_eigenvalue_ratio_examples(eigs, r_max, expected):
    assert eigenvalue_ratio_r(np.array(eigs, dtype=float), r_max) == expected


@pytest.mark.parametrize("eigs, r_max", [((1, 2, 3), 1), ((3, 2, 1), 3), ((3, 2, 1), 0), ((3, -1, -2), 1)])
def test_eigenvalue_ratio_preconditions(eigs, r_max):
    with pytest.raises(InvalidInput):
        eigenvalue_ratio_r(np.array(eigs, dtype=float), r_max)


def test_eigenvalue_ratio_recovers_spikes():
    hits = 0
    n, t, r = 100, 200, 2
    for seed in range(200):
        g = np.random.default_rng(seed)
        b = np.zeros((n, r))
        b[:50, 0] = 1.0
        b[50:, 1] = 1.0
        x = np.sqrt(10.0) * b @ g.standard_normal((r, t)) + g.standard_normal((n, t))
        lam = np.linalg.eigvalsh(sample_cov(x))[::-1]
        hits += eigenvalue_ratio_r(lam, 8) == r
    assert hits >= 190


def test_poet_rate_formula():
    n, t, r = 100, 50, 2
    expect = (r * np.sqrt(np.log(n)) + r * r) / np.sqrt(t) + r**3 / np.sqrt(n) + np.sqrt(np.log(n) / t)
    assert np.isclose(poet_rate(n, t, r), expect)


@pytest.fixture(scope="module")
def setting2_panel():
    spec = build_setting2(60, r=1, seed=3)
    return spec, sample_returns(spec, 120, seed=4).values


def test_poet_zero_threshold_is_residual_cov(setting2_panel):
    _, x = setting2_panel
    res = poet(x, c1=0.0)
    assert np.array_equal(res.omega_hat, res.residual_cov)


def test_poet_infinite_threshold_is_diagonal(setting2_panel):
    _, x = setting2_panel
    res = poet(x, c1=np.inf)
    assert np.array_equal(res.omega_hat, np.diag(np.diag(res.residual_cov)))


def test_poet_identity_no_factors_large_c1(rng):
    x = rng.standard_normal((20, 200))
    res = poet(x, c1=50.0, r=0)
    assert np.count_nonzero(res.omega_hat - np.diag(np.diag(res.omega_hat))) == 0


def test_poet_invariants(setting2_panel):
    _, x = setting2_panel
    res = poet(x, c1=1.0, r_max=5)
    om, s_u = res.omega_hat, res.residual_cov
    assert np.array_equal(om, om.T)
    assert np.array_equal(np.diag(om), np.diag(s_u))
    off = ~np.eye(om.shape[0], dtype=bool)
    kept = (om != 0) & off
    assert np.all(np.abs(om[kept]) >= res.thresholds[kept])
    assert 0 <= res.r_hat <= 5
    assert res.r_hat == 1


def test_poet_residuals_follow_definition(setting2_panel):
    _, x = setting2_panel
    dec = PoetDecomposition(x, r=1)
    u = np.linalg.svd(x, full_matrices=False)[0][:, :1]
    resid = x - u @ (u.T @ x)
    assert np.allclose(dec.residuals, resid)
    s_u = resid @ resid.T / x.shape[1]
    theta = ((resid[:, None, :] * resid[None, :, :] - s_u[:, :, None]) ** 2).mean(axis=2)
    assert np.allclose(dec.theta, theta)


def test_poet_sparsity_monotone_in_c1(setting2_panel):
    _, x = setting2_panel
    dec = PoetDecomposition(x)
    zeros = [np.sum(dec.threshold(c).omega_hat == 0) for c in DEFAULT_C1_GRID]
    assert all(a <= b for a, b in zip(zeros, zeros[1:]))


def test_poet_degenerate_factor_count(rng):
    x = rng.standard_normal((3, 10))
    with pytest.raises(DegenerateFactorCount):
        PoetDecomposition(x, r=3)


def test_poet_needs_enough_data():
    with pytest.raises(InvalidInput):
        poet(np.ones((1, 10)), c1=1.0)


def test_poet_error_decreases_with_t():
    spec = build_setting2(50, r=1, seed=9)
    errs = []
    for t in (50, 100, 200, 400):
        e = [np.linalg.norm(poet(sample_returns(spec, t, seed=s).values, c1=1.0, r=1).omega_hat - spec.omega, 2)
             for s in range(20)]
        errs.append(np.mean(e))
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_repair_pd():
    good = np.diag([1.0, 2.0])
    out, eps = repair_pd(good)
    assert eps == 0.0 and np.array_equal(out, good)
    bad = np.array([[1.0, 2.0], [2.0, 1.0]])
    out, eps = repair_pd(bad)
    assert np.isclose(eps, 1.0 + 1e-8)
    assert is_positive_definite(out)


def test_fold_blocks_contiguous():
    blocks = fold_blocks(23, 5)
    assert np.array_equal(np.concatenate(blocks), np.arange(23))
    assert all(np.all(np.diff(b) == 1) for b in blocks)
    assert {len(b) for b in blocks} <= {4, 5}


def test_cv_single_grid_point(setting2_panel):
    _, x = setting2_panel
    assert poet_cv_c1(x, grid=[0.7]) == 0.7


def test_cv_tie_goes_to_smallest(setting2_panel):
    _, x = setting2_panel
    # Both constants above every entry's threshold give the same diagonal estimate.
    assert poet_cv_c1(x, grid=[1e6, 1e5]) == 1e5


def test_cv_preconditions(setting2_panel):
    _, x = setting2_panel
    with pytest.raises(InvalidInput):
        poet_cv_c1(x, grid=[])
    with pytest.raises(InvalidInput):
        poet_cv_c1(x, folds=1)
    with pytest.raises(InvalidInput):
        poet_cv_c1(x[:, :9], folds=5)


def test_cv_selects_grid_minimum(setting2_panel):
    _, x = setting2_panel
    grid = DEFAULT_C1_GRID[::4]
    c1, scores = poet_cv_c1(x, grid=grid, return_scores=True)
    assert c1 in grid
    # Recompute the held-out score for every grid point by brute force.
    t = x.shape[1]
    brute = np.zeros(len(grid))
    for block in fold_blocks(t, 5):
        train = x[:, np.setdiff1d(np.arange(t), block)]
        for g, c in enumerate(grid):
            omega, _ = repair_pd(poet(train, c1=c).omega_hat)
            w = ridgelet2_from_cov(sample_cov(train), omega)
            brute[g] += np.mean((w @ x[:, block]) ** 2) / 5
    assert np.allclose(scores, brute, rtol=1e-10)
    assert scores[list(grid).index(c1)] <= scores.min()


def test_linear_shrinkage_matches_sklearn(rng):
    x = rng.standard_normal((15, 40)) * rng.uniform(0.5, 2, (15, 1))
    ours = linear_shrinkage(x)
    ref, _ = ledoit_wolf(x.T, assume_centered=True)
    assert np.allclose(ours, ref, rtol=1e-10, atol=1e-12)
    ours_c = linear_shrinkage(x, demean=True)
    ref_c, _ = ledoit_wolf(x.T, assume_centered=False)
    assert np.allclose(ours_c, ref_c, rtol=1e-10, atol=1e-12)


def test_linear_shrinkage_examples(rng):
    x = np.sqrt(2.0) * np.eye(4)
    assert np.allclose(linear_shrinkage(x), sample_cov(x))
    one = rng.standard_normal((1, 30))
    assert np.allclose(linear_shrinkage(one), sample_cov(one))
    r = rng.standard_normal((20, 10))
    assert np.isclose(np.trace(linear_shrinkage(r)), np.trace(sample_cov(r)), rtol=0, atol=1e-8)
    assert is_positive_definite(linear_shrinkage(r))


def test_linear_shrinkage_zero_variance():
    with pytest.raises(InvalidInput):
        linear_shrinkage(np.zeros((3, 5)))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 15), st.integers(2, 30), st.integers(0, 2**32 - 1))
def test_linear_shrinkage_trace_property(n, t, seed):
    r = np.random.default_rng(seed).standard_normal((n, t))
    assert np.isclose(np.trace(linear_shrinkage(r)), np.trace(sample_cov(r)), atol=1e-8)
