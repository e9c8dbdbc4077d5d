import warnings

import numpy as np
import pytest

from conftest import if_error
from sparsetf.driver import (
    DriverConfig,
    decompose,
    decompose_separately,
    initial_phase_guess,
    periodogram,
    winsorize,
)
from sparsetf.errors import ComponentCapReached, MissingSamples, ZeroResidual
from sparsetf.gauss_newton import GnConfig
from sparsetf.model import PhaseFunction, ingest, reconstruct
from sparsetf.spectral import TWO_PI
from sparsetf.synthetic import chirp_phase, generate_example1, random_mask


def test_periodogram_peak():
    t = np.linspace(0, 1, 256)
    bins, p = periodogram(np.cos(TWO_PI * 17 * t), t, 60)
    assert bins[np.argmax(p)] == 17


def test_chirplet_guess_finds_rate():
    t = np.linspace(0, 1, 512)
    ph = initial_phase_guess(np.cos(TWO_PI * (40 * t + 20 * t**2)), t, guess="chirplet", lam=0.125)
    np.testing.assert_allclose(ph.theta, TWO_PI * (40 * t + 20 * t**2), atol=TWO_PI * 0.5)


def test_guess_respects_band_limit():
    t = np.linspace(0, 1, 64)
    ph = initial_phase_guess(np.cos(TWO_PI * 31 * t), t, lam=0.5)
    assert ph.span / TWO_PI * 1.5 < 32


def test_zero_residual_raises():
    with pytest.raises(ZeroResidual):
        initial_phase_guess(np.zeros((2, 64)), np.linspace(0, 1, 64))


def test_winsorize_clips_spikes():
    r = np.random.default_rng(0).normal(size=(1, 500))
    r[0, 10] = 100.0
    assert winsorize(r).max() < 5.0


def test_config_validation():
    with pytest.raises(ValueError):
        DriverConfig(max_components=0)
    with pytest.raises(ValueError):
        DriverConfig(mode="fast")
    with pytest.raises(ValueError):
        DriverConfig(guess="wavelet")
    with pytest.raises(ValueError):
        DriverConfig(residual_tol=0)


def test_zero_ensemble():
    res = decompose(ingest(np.linspace(0, 1, 64), np.zeros(64)))
    assert res.K == 0 and res.stop_reason == "zero ensemble"


def test_missing_needs_robust_mode():
    ens = generate_example1(0, noise_scale=0, m_signals=1)
    masked = ingest(ens.times, ens.values, random_mask(ens.values.shape, 0.1, 0))
    with pytest.raises(MissingSamples):
        decompose(masked, DriverConfig(mode="nonperiodic"))


def test_single_chirp_periodic_and_telescoping():
    ens = generate_example1(0, noise_scale=0, m_signals=2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ComponentCapReached)
        res = decompose(ens, DriverConfig(mode="periodic", max_components=1))
    assert res.K == 1
    assert if_error(res.components[0].frequency_hz(), ens.times) < 1e-2
    np.testing.assert_allclose(reconstruct(res, ens) + res.residuals, ens.values, atol=1e-10)
    assert res.diagnostics[0]["energy_reduction"] > 0.9


def test_cap_warning():
    ens = generate_example1(1, noise_scale=0, m_signals=2)
    with pytest.warns(ComponentCapReached):
        res = decompose(ens, DriverConfig(mode="periodic", max_components=1, residual_tol=1e-6))
    assert res.stop_reason == "max_components"


def test_user_initial_phase_is_used():
    ens = generate_example1(0, noise_scale=0, m_signals=1)
    start = PhaseFunction(ens.times, chirp_phase(ens.times))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ComponentCapReached)
        res = decompose(ens, DriverConfig(mode="periodic", max_components=1, initial_phases=[start]))
    assert res.diagnostics[0]["initial_cycles"] == pytest.approx(start.span / TWO_PI)


def test_decompose_separately_returns_one_per_row():
    ens = generate_example1(0, noise_scale=0, m_signals=2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ComponentCapReached)
        out = decompose_separately(ens, DriverConfig(mode="periodic", max_components=1,
                                                     gn=GnConfig(max_inner_iters=30)))
    assert len(out) == 2 and all(r.residuals.shape == (1, 512) for r in out)
