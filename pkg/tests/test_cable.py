import numpy as np
import pytest

from sparsetf.cable import (
    CableSpec,
    frequency_from_tension,
    harmonic_guess,
    synthetic_cable,
    tension_from_frequency,
)
from sparsetf.errors import NonPositiveFrequency
from sparsetf.spectral import TWO_PI


def test_taut_string_law():
    spec = CableSpec(80.0, 100.0)
    # F = 4 m L^2 f^2 with f = omega / (2 pi n)
    assert tension_from_frequency(TWO_PI * 2 * 1.2, 2, spec) == pytest.approx(4 * 80 * 100**2 * 1.44)
    w = frequency_from_tension(4.6e6, spec)
    assert tension_from_frequency(w, 1, spec) == pytest.approx(4.6e6)
    assert tension_from_frequency(3 * w, 3, spec) == pytest.approx(4.6e6)


def test_nonpositive_frequency():
    with pytest.raises(NonPositiveFrequency):
        tension_from_frequency(np.array([1.0, 0.0]), 1, CableSpec(1, 1))


def test_spec_validation():
    with pytest.raises(ValueError):
        CableSpec(0, 1)
    with pytest.raises(ValueError):
        CableSpec(1, 1, (1, 1))
    with pytest.raises(ValueError):
        CableSpec(1, 1, (0,))


def test_synthetic_cable_truth_is_consistent():
    ens, truth = synthetic_cable(0, noise_scale=0.0)
    spec = CableSpec(80.0, 100.0, (1, 2, 3, 4, 5))
    np.testing.assert_allclose(tension_from_frequency(truth["omega"], 1, spec), truth["tension"], rtol=1e-12)
    dtheta = np.gradient(truth["theta"], truth["times"])
    np.testing.assert_allclose(dtheta[2:-2], truth["omega"][2:-2], rtol=1e-4)
    assert ens.values.shape == (1, 1024)


def test_harmonic_guess_finds_fundamental():
    ens, truth = synthetic_cable(0)
    ph = harmonic_guess(ens.values, ens.times, (1, 2, 3, 4, 5))
    cycles = truth["theta"][-1] / TWO_PI
    assert abs(ph.span / TWO_PI - cycles) <= 1.0
