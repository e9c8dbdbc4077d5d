"""Synthetic ensembles with known phases.

All generators draw from ``numpy.random.default_rng(seed)`` (the PCG64 bit
generator) and standard normal variates, so a seed fixes the output exactly
within one numpy version.
"""

from __future__ import annotations

import numpy as np

from .model import SignalEnsemble, ingest
from .spectral import TWO_PI


def chirp_phase(t) -> np.ndarray:
    """``40 pi (t + 1)^2``, instantaneous frequency ``40 (t + 1)`` Hz."""
    t = np.asarray(t, dtype=float)
    return 40.0 * np.pi * (t + 1.0) ** 2


def chirp_frequency(t) -> np.ndarray:
    return 40.0 * (np.asarray(t, dtype=float) + 1.0)


def generate_example1(
    seed: int | None = 0, n_samples: int = 512, m_signals: int = 10, noise_scale: float = 5.0
) -> SignalEnsemble:
    """The noisy chirp ensemble ``cos(40 pi (t+1)^2) + noise_scale * X_j``.

    Samples are uniform on ``[0, 1]`` and the rows are not centered, so the
    stored values are exactly the generated ones.
    """
    t = np.linspace(0.0, 1.0, n_samples)
    rng = np.random.default_rng(seed)
    clean = np.cos(chirp_phase(t))
    values = clean + noise_scale * rng.standard_normal((m_signals, n_samples))
    return ingest(t, values, center=False)


def two_chirps(n_samples: int = 1024, m_signals: int = 3):
    """Two chirps with frequency ratio above 3 and distinct smooth envelopes.

    The slow mode sweeps 10 to 15 Hz, the fast one 48 to 64 Hz.  Returns the
    ensemble and a list of ``(theta, frequency_hz, envelopes)`` per mode,
    fast mode first.
    """
    t = np.linspace(0.0, 1.0, n_samples)
    slow = TWO_PI * (10.0 * t + 2.5 * t**2)
    fast = TWO_PI * (48.0 * t + 8.0 * t**2)
    j = np.arange(m_signals)[:, None]
    env_fast = 1.0 + 0.3 * np.cos(TWO_PI * t + j)
    env_slow = 0.6 + 0.2 * np.sin(np.pi * t + 0.7 * j) + 0.1 * j
    values = env_fast * np.cos(fast) + env_slow * np.cos(slow)
    truth = [
        (fast, 48.0 + 16.0 * t, env_fast),
        (slow, 10.0 + 5.0 * t, env_slow),
    ]
    return ingest(t, values, center=False), truth


def inject_spikes(values, fraction: float = 0.05, amplitude: float = 10.0, seed: int | None = 0):
    """Replace a random ``fraction`` of each row with ``+-amplitude`` spikes.

    Returns the corrupted copy and the boolean spike locations.
    """
    values = np.array(np.atleast_2d(values), dtype=float)
    rng = np.random.default_rng(seed)
    m, n = values.shape
    count = int(round(fraction * n))
    where = np.zeros(values.shape, dtype=bool)
    for row in range(m):
        where[row, rng.choice(n, size=count, replace=False)] = True
    signs = rng.choice([-1.0, 1.0], size=values.shape)
    values[where] = amplitude * signs[where]
    return values, where


def random_mask(shape, fraction: float = 0.1, seed: int | None = 0, keep_ends: bool = True):
    """Boolean mask with ``fraction`` of each row set to ``False`` (missing).

    The first and last samples are kept by default so the time span is
    unchanged.
    """
    m, n = shape
    rng = np.random.default_rng(seed)
    mask = np.ones(shape, dtype=bool)
    pool = np.arange(1, n - 1) if keep_ends else np.arange(n)
    count = int(round(fraction * n))
    for row in range(m):
        mask[row, rng.choice(pool, size=count, replace=False)] = False
    return mask
