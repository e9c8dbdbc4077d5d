import numpy as np
import pytest

from oracles import brute_group_prox, brute_scalar_prox, dense_fourier, dense_group_alm
from sparsetf.errors import MaxItersExceeded
from sparsetf.group_sparse import (
    AlmConfig,
    constraint_residual,
    extend,
    fourier_analysis,
    fourier_synthesis,
    group_norm,
    group_shrink,
    omega_mask,
    scalar_shrink,
    zero_pad,
)
from sparsetf.model import PhaseFunction
from sparsetf.spectral import ThetaGrid


def band_limited(rng, n, lbar, m):
    grid = ThetaGrid(0.0, float(lbar), n)
    n_obs = grid.observed_count(0.5 * grid.span)
    th = grid.points[:n_obs, None]
    F = sum(rng.normal(size=m) * np.cos(k * th / 2 + rng.uniform(0, 6, size=m))
            for k in range(1, lbar + 1))
    return grid, F


def test_fourier_pair_matches_dense_matrix(rng):
    X = rng.normal(size=(16, 3)) + 1j * rng.normal(size=(16, 3))
    np.testing.assert_allclose(fourier_synthesis(X), dense_fourier(16) @ X, atol=1e-13)
    np.testing.assert_allclose(fourier_analysis(X), dense_fourier(16).conj().T @ X, atol=1e-13)


@pytest.mark.parametrize("n", [8, 64, 127, 256])
def test_fourier_unitarity(rng, n):
    X = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    np.testing.assert_allclose(fourier_analysis(fourier_synthesis(X)), X, atol=1e-12)
    np.testing.assert_allclose(fourier_synthesis(fourier_analysis(X)), X, atol=1e-12)
    assert abs(np.linalg.norm(fourier_synthesis(X)) - np.linalg.norm(X)) <= 1e-12 * np.linalg.norm(X)


def test_group_shrink_matches_brute_force(rng):
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 6))
        v = rng.normal(size=d) * rng.uniform(0.1, 3.0)
        t = rng.uniform(0.0, 2.0)
        worst = max(worst, np.abs(group_shrink(v[None], t)[0] - brute_group_prox(v, t)).max())
    assert worst <= 1e-6


def test_scalar_shrink_matches_brute_force(rng):
    v = rng.normal(size=150) * 3
    t = rng.uniform(0, 2, size=150)
    got = np.array([scalar_shrink(vi, ti) for vi, ti in zip(v, t)])
    ref = np.array([brute_scalar_prox(vi, ti) for vi, ti in zip(v, t)])
    assert np.abs(got - ref).max() <= 1e-6


def test_shrink_edge_cases():
    assert scalar_shrink(3.0, np.inf) == 0.0
    np.testing.assert_array_equal(group_shrink(np.zeros((2, 3)), 1.0), 0.0)
    np.testing.assert_array_equal(group_shrink(np.ones((1, 4)), 0.0), 1.0)
    with pytest.raises(ValueError):
        group_shrink(np.ones((1, 2)), -1.0)
    with pytest.raises(ValueError):
        scalar_shrink(1.0, -1.0)


def test_group_shrink_complex_rows():
    v = np.array([[3 + 4j, 0.0]])
    np.testing.assert_allclose(group_shrink(v, 1.0), v * 0.8, atol=1e-15)
    assert group_norm(v) == pytest.approx(5.0)


def test_extend_matches_dense_reference(rng):
    for _ in range(6):
        n = int(rng.choice([32, 64, 128]))
        m = int(rng.integers(1, 4))
        lbar = int(rng.integers(2, 8))
        grid, F = band_limited(rng, n, lbar, m)
        cfg = AlmConfig(tol=1e-6, max_iters=20000)
        got = extend(F, grid, cfg)
        ref, iters = dense_group_alm(F, n, cfg.gamma, cfg.tol, cfg.max_iters)
        assert iters == got.iterations
        assert np.linalg.norm(got.X - ref) <= 1e-6 * np.linalg.norm(ref)
        F_bar, mask = zero_pad(F, n)
        assert constraint_residual(got.X, F_bar, mask) <= 1e-5 * np.linalg.norm(F)


def test_extension_reproduces_observed_rows(rng):
    grid, F = band_limited(rng, 64, 4, 2)
    c = extend(F, grid, AlmConfig(tol=1e-8, max_iters=20000))
    np.testing.assert_allclose(c.extension()[: F.shape[0]], F, atol=1e-6 * np.abs(F).max())


def test_extend_raises_with_state():
    rng = np.random.default_rng(0)
    grid, F = band_limited(rng, 128, 2, 3)
    with pytest.raises(MaxItersExceeded) as err:
        extend(F, grid, AlmConfig(tol=1e-12, max_iters=3))
    assert err.value.state.iterations == 3
    assert err.value.residual > 0


def test_warm_start_converges_faster(rng):
    grid, F = band_limited(rng, 128, 3, 2)
    cold = extend(F, grid, AlmConfig(tol=1e-6, max_iters=20000))
    warm = extend(F * 1.001, grid, AlmConfig(tol=1e-6, max_iters=20000), init=cold)
    assert warm.iterations < cold.iterations


def test_zero_data_is_trivially_converged():
    grid = ThetaGrid(0.0, 4.0, 32)
    c = extend(np.zeros((10, 2)), grid)
    assert c.converged and not np.any(c.X)


def test_omega_mask_is_leading_block():
    t = np.linspace(0, 1, 50)
    ph = PhaseFunction.linear(t, 6.2)
    g = ThetaGrid.extended(ph)
    mask = omega_mask(g, ph.span)
    k = g.observed_count(ph.span)
    assert mask[:k].all() and not mask[k:].any()


def test_alm_config_validation():
    with pytest.raises(ValueError):
        AlmConfig(gamma=0.0)
    with pytest.raises(ValueError):
        AlmConfig(gamma_rule="adaptive")
    F_bar, mask = zero_pad(np.ones((4, 1)), 8)
    assert AlmConfig(gamma_rule="rpca").penalty(F_bar, mask) == pytest.approx(4 / 16)
