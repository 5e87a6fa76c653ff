import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msnr_bss.channel import PAPER_MIXING_MATRIX, ChannelSpec, mix
from msnr_bss.evaluation import align
from msnr_bss.harness import demo_sources
from msnr_bss.linalg import generalized_eigen
from msnr_bss.msnr import (
    DegenerateStatisticsError,
    apply_demixing,
    correlation_matrices,
    moving_average,
    objective,
    objective_gradient,
    solve_demixing,
    solve_from_matrices,
)

from conftest import random_spd


def brute_moving_average(x, L):
    out = np.empty_like(x, dtype=float)
    for n in range(x.shape[-1]):
        lo = max(0, n - L + 1)
        out[..., n] = np.mean(x[..., lo:n + 1], axis=-1)
    return out


def fd_gradient(W, C, Cbar, h=1e-6):
    G = np.zeros_like(W)
    for i in range(W.shape[0]):
        for j in range(W.shape[1]):
            Wp, Wm = W.copy(), W.copy()
            Wp[i, j] += h
            Wm[i, j] -= h
            G[i, j] = (objective(Wp, C, Cbar)[i] - objective(Wm, C, Cbar)[i]) / (2 * h)
    return G


# -- moving average -----------------------------------------------------------


@pytest.mark.parametrize("c", [0.1, -3.7, 1e6])
@pytest.mark.parametrize("L", [2, 5, 16])
def test_moving_average_constant(c, L):
    x = np.full((1, 16), c)
    np.testing.assert_array_equal(moving_average(x, L), x)


def test_moving_average_hand_examples():
    np.testing.assert_array_equal(moving_average([1, 2, 3, 4], 2)[0], [1, 1.5, 2.5, 3.5])
    np.testing.assert_allclose(moving_average([1, 2, 3, 4, 5], 3)[0], [1, 1.5, 2, 3, 4], atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 60), data=st.data())
def test_moving_average_matches_brute_force(seed, n, data):
    L = data.draw(st.integers(2, n))
    x = np.random.default_rng(seed).standard_normal((2, n))
    np.testing.assert_allclose(moving_average(x, L), brute_moving_average(x, L), atol=1e-12)


@pytest.mark.parametrize("L", [1, 0, 11, 2.5])
def test_moving_average_bad_length(L):
    with pytest.raises(ValueError):
        moving_average(np.zeros((1, 10)), L)


# -- correlation matrices -----------------------------------------------------


def test_correlation_matrices_hand_example():
    C, Cbar = correlation_matrices([1, -1, 1, -1], 2)
    np.testing.assert_allclose(C, [[1.0]])
    np.testing.assert_allclose(Cbar, [[0.75]])


def test_correlation_matrices_constant_input():
    _, Cbar = correlation_matrices(np.full((2, 30), 2.5), 4)
    np.testing.assert_array_equal(Cbar, np.zeros((2, 2)))


def test_correlation_matrices_psd(rng):
    x = rng.standard_normal((4, 300))
    for M in correlation_matrices(x, 6):
        np.testing.assert_array_equal(M, M.T)
        assert np.linalg.eigvalsh(M).min() >= -1e-12


# -- objective and gradient ---------------------------------------------------


def test_objective_equal_pair(rng):
    M = random_spd(rng, 3)
    np.testing.assert_allclose(objective(rng.standard_normal((3, 3)), M, M), 0, atol=1e-12)


def test_objective_ratio_ten(rng):
    M = random_spd(rng, 3)
    np.testing.assert_allclose(objective(rng.standard_normal((2, 3)), 10 * M, M), 10, atol=1e-12)


def test_objective_at_top_eigenvector(rng):
    C, Cbar = random_spd(rng, 3), random_spd(rng, 3)
    res = generalized_eigen(C, Cbar)
    f = objective(res.eigenvectors[:1], C, Cbar)[0]
    assert abs(f - 10 * np.log10(res.eigenvalues[0])) <= 1e-9


def test_objective_degenerate_denominator():
    with pytest.raises(ValueError, match="degenerate denominator for row 1"):
        objective([[1.0, 0.0], [0.0, 1.0]], np.eye(2), np.diag([1.0, 0.0]))


def test_objective_row_scale_invariance(rng):
    C, Cbar = random_spd(rng, 4), random_spd(rng, 4)
    W = rng.standard_normal((4, 4))
    D = np.diag([3.0, -0.25, 1e3, -7.5])
    np.testing.assert_allclose(objective(D @ W, C, Cbar), objective(W, C, Cbar), rtol=0, atol=1e-12)


def test_gradient_vanishes_at_eigenvectors(rng):
    C, Cbar = random_spd(rng, 3), random_spd(rng, 3)
    W = generalized_eigen(C, Cbar).eigenvectors
    assert np.linalg.norm(objective_gradient(W, C, Cbar), axis=1).max() <= 1e-8


def test_gradient_matches_finite_differences(rng):
    C, Cbar = random_spd(rng, 3), random_spd(rng, 3)
    W = rng.standard_normal((3, 3))
    G = objective_gradient(W, C, Cbar)
    F = fd_gradient(W, C, Cbar)
    assert np.linalg.norm(G - F) <= 1e-5 * np.linalg.norm(G)


@pytest.mark.parametrize("alpha", [0.5, 3.0, -2.0])
def test_gradient_row_homogeneity(rng, alpha):
    C, Cbar = random_spd(rng, 3), random_spd(rng, 3)
    W = rng.standard_normal((3, 3))
    G = objective_gradient(W, C, Cbar)
    Ws = W.copy()
    Ws[1] *= alpha
    Gs = objective_gradient(Ws, C, Cbar)
    np.testing.assert_allclose(Gs[1], G[1] / alpha, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(Gs[[0, 2]], G[[0, 2]], rtol=1e-12)


# -- solve / apply ------------------------------------------------------------


def test_solve_unmixed_sources():
    s = demo_sources()
    sol = solve_demixing(s, 7)
    rep = align(s, apply_demixing(sol.W, s))
    assert rep.per_source_corr.min() >= 0.99


def test_solve_paper_mixture_noiseless():
    s = demo_sources()
    x = mix(ChannelSpec(PAPER_MIXING_MATRIX), s)
    sol = solve_demixing(x, 7)
    rep = align(s, apply_demixing(sol.W, x))
    assert rep.per_source_corr.min() >= 0.99


def test_solution_fields_consistent(rng):
    x = rng.standard_normal((3, 500)).cumsum(axis=1) + rng.standard_normal((3, 500))
    sol = solve_demixing(x, 5)
    assert sol.ma_length == 5
    assert np.all(np.diff(sol.eigenvalues) <= 0)
    np.testing.assert_allclose(sol.objective_db, 10 * np.log10(sol.eigenvalues), atol=1e-9)
    C, Cbar = correlation_matrices(x, 5)
    np.testing.assert_allclose(objective(sol.W, C, Cbar), sol.objective_db, atol=1e-9)
    assert np.linalg.norm(objective_gradient(sol.W, C, Cbar), axis=1).max() <= 1e-8 * np.linalg.norm(C)


def test_rows_maximize_constrained_rayleigh(rng):
    x = rng.standard_normal((3, 400)).cumsum(axis=1) * [[1], [0.2], [3]] + rng.standard_normal((3, 400))
    sol = solve_demixing(x, 6)
    C, Cbar = correlation_matrices(x, 6)
    for i, lam in enumerate(sol.eigenvalues):
        V = rng.standard_normal((10_000, 3))
        prev = sol.W[:i]
        if i:
            V -= (V @ Cbar @ prev.T) @ prev  # rows of W are Cbar-orthonormal
        q = np.einsum("ij,jk,ik->i", V, C, V) / np.einsum("ij,jk,ik->i", V, Cbar, V)
        assert q.max() <= lam + 1e-6


def test_theta_grid_oracle_2x2():
    s = demo_sources()
    x = mix(ChannelSpec(PAPER_MIXING_MATRIX), s)
    C, Cbar = correlation_matrices(x, 7)
    sol = solve_demixing(x, 7)
    th = np.linspace(0, np.pi, 100_000)
    W = np.stack([np.cos(th), np.sin(th)], axis=1)
    best = objective(W, C, Cbar).max()
    assert abs(best - 10 * np.log10(sol.eigenvalues[0])) <= 1e-3


def test_normalization_does_not_change_w(rng):
    x = rng.standard_normal((2, 300)).cumsum(axis=1) + rng.standard_normal((2, 300))
    a = solve_from_matrices(*correlation_matrices(x, 4))
    b = solve_from_matrices(*correlation_matrices(x, 4, normalize=False))
    unit = lambda W: W / np.linalg.norm(W, axis=1, keepdims=True)
    np.testing.assert_allclose(unit(a.W), unit(b.W), atol=1e-10)
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, rtol=1e-10)


def test_solve_degenerate_cbar():
    x = np.vstack([np.ones(100), 2 * np.ones(100)])
    with pytest.raises(DegenerateStatisticsError, match="averaged-difference covariance is singular"):
        solve_demixing(x, 5)


def test_ridge_rescues_rank_deficient_cbar():
    # Cbar is exactly rank one; the ridge makes it factorable
    C = np.diag([2.0, 1.0])
    Cbar = np.array([[1.0, 1.0], [1.0, 1.0]])
    sol = solve_from_matrices(C, Cbar)
    assert sol.ridge_applied


def test_solve_needs_enough_samples():
    with pytest.raises(ValueError, match="at least 20 samples"):
        solve_demixing(np.random.default_rng(0).standard_normal((2, 15)), 3)


def test_apply_identity_and_permutation(rng):
    x = rng.standard_normal((3, 40))
    np.testing.assert_array_equal(apply_demixing(np.eye(3), x), x)
    P = np.eye(3)[[2, 0, 1]]
    np.testing.assert_array_equal(apply_demixing(P, x), x[[2, 0, 1]])
    with pytest.raises(ValueError):
        apply_demixing(np.eye(2), x)


def test_apply_matches_composition():
    x = mix(ChannelSpec(PAPER_MIXING_MATRIX, 30.0, 1), demo_sources())
    sol = solve_demixing(x, 7)
    np.testing.assert_array_equal(apply_demixing(sol.W, x), sol.W @ x)
