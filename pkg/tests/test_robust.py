import numpy as np
import pytest

from sparsetf.errors import AllMissing, MaxItersExceeded
from sparsetf.group_sparse import AlmConfig, extend, zero_pad
from sparsetf.model import ingest
from sparsetf.robust import extend_robust, prefill_missing
from sparsetf.spectral import ThetaGrid


def smooth_data(n_obs=40, m=2):
    th = np.arange(n_obs) * 2 * np.pi * 4 / 64
    return np.stack([np.cos(th + j) + 0.5 * np.sin(2 * th) for j in range(m)], axis=1)


GRID = ThetaGrid(0.0, 4.0, 64)


def test_infinite_threshold_reduces_to_plain_extension():
    F = smooth_data()
    cfg = AlmConfig(tol=1e-8, max_iters=20000)
    plain = extend(F, GRID, cfg)
    robust = extend_robust(F, GRID, cfg, z_threshold=np.inf)
    assert not np.any(robust.Z)
    np.testing.assert_allclose(robust.coeffs.X, plain.X, atol=1e-12)


def test_outliers_are_confined_to_observed_rows():
    F = smooth_data()
    F[7, 0] += 20.0
    st = extend_robust(F, GRID, AlmConfig(tol=1e-6, max_iters=5000))
    assert not np.any(st.Z_bar[~st.coeffs.omega_mask])
    assert st.Z.shape == F.shape
    assert np.unravel_index(np.abs(st.Z).argmax(), F.shape) == (7, 0)


def test_robust_constraint_holds():
    F = smooth_data()
    F[3, 1] -= 15.0
    st = extend_robust(F, GRID, AlmConfig(tol=1e-7, max_iters=20000))
    F_bar, mask = zero_pad(F, GRID.n_points)
    fit = np.fft.ifft(st.coeffs.X, axis=0, norm="ortho")[mask] + st.Z
    assert np.linalg.norm(fit - F) <= 1e-5 * np.linalg.norm(F)


def test_literal_update_is_available_but_validated():
    with pytest.raises(ValueError):
        extend_robust(smooth_data(), GRID, q_update="other")
    with pytest.raises(MaxItersExceeded) as err:
        extend_robust(smooth_data(), GRID, AlmConfig(tol=1e-14, max_iters=2))
    assert err.value.state.Z_bar.shape == (64, 2)


def test_prefill_uses_row_mean():
    t = np.linspace(0, 1, 20)
    v = np.vstack([np.arange(20.0), np.ones(20)])
    mask = np.ones_like(v, dtype=bool)
    mask[0, [3, 4]] = False
    ens = prefill_missing(ingest(t, v, mask, center=False))
    expected = np.delete(np.arange(20.0), [3, 4]).mean()
    assert ens.values[0, 3] == pytest.approx(expected)
    assert not np.isnan(ens.values).any()


def test_prefill_rejects_empty_row():
    t = np.linspace(0, 1, 20)
    mask = np.ones((2, 20), dtype=bool)
    mask[1] = False
    with pytest.raises(AllMissing):
        prefill_missing(ingest(t, np.ones((2, 20)), mask))
