import numpy as np
import pytest

from sparsetf.errors import BandOverflow, DegeneratePhase
from sparsetf.model import PhaseFunction
from sparsetf.spectral import (
    TWO_PI,
    FilterSpec,
    ThetaGrid,
    demodulate,
    derivative_theta,
    lowpass_filter,
    project_lowfreq,
    resample_to_theta,
    resample_to_time,
)


def test_filter_shape():
    spec = FilterSpec(0.5)
    assert lowpass_filter(0.0, spec) == 1.0
    assert lowpass_filter(0.25, spec) == pytest.approx(0.5)
    assert lowpass_filter(0.5, spec) == 0.0
    assert lowpass_filter(0.0, FilterSpec(0.5, normalize=False)) == 2.0
    w = np.linspace(-1, 1, 401)
    np.testing.assert_array_equal(lowpass_filter(w, spec), lowpass_filter(-w, spec))
    with pytest.raises(ValueError):
        FilterSpec(0.6)


def test_grid_geometry():
    t = np.linspace(0, 1, 100)
    ph = PhaseFunction.linear(t, 10.3)
    g = ThetaGrid.extended(ph)
    assert g.period_factor == 20 and g.n_points == 200
    assert g.observed_count(ph.span) == int(np.floor(10.3 / 20 * 200)) + 1
    p = ThetaGrid.periodic(ph)
    assert p.span == pytest.approx(ph.span)
    with pytest.raises(DegeneratePhase):
        ThetaGrid.extended(PhaseFunction.linear(t, 0.5))


def test_tiny_phase_keeps_extension_region():
    t = np.linspace(0, 1, 64)
    ph = PhaseFunction.linear(t, 1.9)
    g = ThetaGrid.extended(ph)
    assert ph.span <= 0.75 * g.span


def test_resample_round_trip_on_smooth_signal():
    t = np.linspace(0, 1, 400)
    theta = TWO_PI * (10 * t + 3 * t**2)
    ph = PhaseFunction(t, theta)
    g = ThetaGrid.periodic(ph)
    sig = np.cos(theta) * (1 + 0.2 * t)
    on_grid = resample_to_theta(sig, t, ph, g)
    back = resample_to_time(on_grid, g, ph)
    # the grid is treated as one period, so only the interior is a plain round trip
    np.testing.assert_allclose(back[8:-8], sig[8:-8], atol=5e-4)


def test_demodulate_pure_tone():
    n, L = 256, 16
    g = ThetaGrid(0.0, L, n)
    th = g.points
    a, b = demodulate(2.0 * np.cos(th) - 0.5 * np.sin(th), g, L, FilterSpec(0.5))
    np.testing.assert_allclose(a, 2.0, atol=1e-12)
    np.testing.assert_allclose(b, -0.5, atol=1e-12)


def test_demodulate_unnormalized_filter_doubles():
    g = ThetaGrid(0.0, 8, 128)
    a, _ = demodulate(np.cos(g.points), g, 8, FilterSpec(0.5, normalize=False))
    np.testing.assert_allclose(a, 2.0, atol=1e-12)


def test_demodulate_harmonic():
    g = ThetaGrid(0.0, 8, 256)
    a, b = demodulate(0.7 * np.cos(3 * g.points), g, 8, FilterSpec(0.5), harmonic=3)
    np.testing.assert_allclose(a, 0.7, atol=1e-12)
    np.testing.assert_allclose(b, 0.0, atol=1e-12)


def test_demodulate_band_overflow():
    g = ThetaGrid(0.0, 60, 128)
    with pytest.raises(BandOverflow):
        demodulate(np.cos(g.points), g, 60, FilterSpec(0.5))


def test_derivative_exact_on_quartic():
    t = np.linspace(0, 1, 50)
    f = t**4 - 2 * t**3 + t
    d = derivative_theta(f, t)
    exact = 4 * t**3 - 6 * t**2 + 1
    np.testing.assert_allclose(d[2:-2], exact[2:-2], atol=1e-10)
    np.testing.assert_allclose(derivative_theta(t**2, t), 2 * t, atol=1e-10)


def test_derivative_nonuniform_grid():
    t = np.sort(np.random.default_rng(3).uniform(0, 1, 60))
    d = derivative_theta(t**2 + 3 * t, t)
    np.testing.assert_allclose(d, 2 * t + 3, atol=1e-8)


def test_project_lowfreq_constant_and_mean():
    t = np.linspace(0, 1, 300)
    ph = PhaseFunction.linear(t, 20)
    c = project_lowfreq(np.full(300, 3.0), ph, 0.3)
    np.testing.assert_allclose(c, 3.0, atol=1e-10)
    x = np.cos(TWO_PI * 15 * t)
    assert np.ptp(project_lowfreq(x, ph, 0.0)) == 0.0
    smooth = project_lowfreq(x, ph, 0.25)
    assert np.abs(smooth[20:-20]).max() < 0.05
    # 2 cycles against 20 oscillations sits at relative frequency 0.1
    slow = np.cos(TWO_PI * 2 * t)
    gain = lowpass_filter(0.1, FilterSpec(0.5))
    np.testing.assert_allclose(project_lowfreq(slow, ph, 0.5)[10:-10], gain * slow[10:-10], atol=1e-3)
