"""Cable tension from vibration records.

Under the taut-string model the natural frequencies of a cable are integer
multiples of the fundamental, ``omega_n = n * omega_1``, and the tension is

    F = 4 m L^2 (omega_n / (2 pi n))^2

with ``m`` the mass per unit length and ``L`` the cable length.  All modes
therefore share one phase ``theta`` (mode ``n`` oscillates as
``cos(n theta)``), and the frequency evidence of every mode can be pooled
into a single estimate of ``theta'``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .driver import SOLVER_ALM, periodogram, winsorize
from .errors import NonPositiveFrequency, NoConvergence, ZeroResidual
from .gauss_newton import GnConfig, Mode, gauss_newton
from .group_sparse import AlmConfig
from .model import PhaseFunction, SignalEnsemble, ingest
from .robust import prefill_missing
from .spectral import TWO_PI


@dataclass(frozen=True)
class CableSpec:
    """Cable constants and the modes used for fusion."""

    mass_density: float
    length: float
    modes: tuple[int, ...] = (1,)

    def __post_init__(self):
        if self.mass_density <= 0 or self.length <= 0:
            raise ValueError("mass_density and length must be positive")
        modes = tuple(int(n) for n in self.modes)
        if not modes or min(modes) < 1 or len(set(modes)) != len(modes):
            raise ValueError("modes must be distinct positive integers")
        object.__setattr__(self, "modes", modes)


@dataclass(frozen=True)
class CableResult:
    """Fused estimate on the physical time axis.

    ``omega`` is the fundamental angular frequency in rad/s and ``tension``
    the matching force.  ``envelopes`` maps each mode to its ``(a, b)`` pair.
    """

    times: np.ndarray
    phase: PhaseFunction
    omega: np.ndarray
    tension: np.ndarray
    envelopes: dict
    diagnostics: dict


def tension_from_frequency(omega_n, n: int, spec: CableSpec) -> np.ndarray:
    """``4 m L^2 (omega_n / (2 pi n))^2`` elementwise; ``omega_n`` in rad/s."""
    omega_n = np.asarray(omega_n, dtype=float)
    if np.any(omega_n <= 0):
        raise NonPositiveFrequency("frequency must be positive everywhere")
    return 4.0 * spec.mass_density * spec.length**2 * (omega_n / (TWO_PI * n)) ** 2


def frequency_from_tension(tension, spec: CableSpec) -> np.ndarray:
    """Fundamental angular frequency for a given tension (inverse law, ``n = 1``)."""
    tension = np.asarray(tension, dtype=float)
    return TWO_PI * np.sqrt(tension / (4.0 * spec.mass_density * spec.length**2))


def harmonic_guess(residuals, times, modes, lam: float = 0.5, robust: bool = False) -> PhaseFunction:
    """Linear fundamental phase maximizing the harmonic-sum periodogram.

    The score of a fundamental bin ``L`` is the sum of the row-averaged power
    at ``n * L`` over the fused modes.
    """
    r = np.atleast_2d(np.asarray(residuals, dtype=float))
    if not np.any(r):
        raise ZeroResidual("signal is identically zero")
    if robust:
        r = winsorize(r)
    t = np.asarray(times, dtype=float)
    t = (t - t[0]) / (t[-1] - t[0])
    modes = tuple(modes)
    # the top mode's band n L + lam L has to stay below Nyquist
    highest = max(1, int(np.ceil(t.size / (2.0 * (max(modes) + lam)))) - 1)
    _, power = periodogram(r, t, highest * max(modes))
    fundamentals = np.arange(1, highest + 1)
    score = np.zeros(fundamentals.size)
    for n in modes:
        score += power[fundamentals * n - 1]
    return PhaseFunction.linear(times, int(fundamentals[np.argmax(score)]))


def harmonic_fuse(
    ensemble: SignalEnsemble,
    spec: CableSpec,
    *,
    mode: Mode = "nonperiodic",
    gn: GnConfig = GnConfig(),
    alm: AlmConfig = SOLVER_ALM,
    initial_phase: PhaseFunction | None = None,
) -> CableResult:
    """Joint fundamental phase from all modes and the implied tension.

    Each mode ``n`` is demodulated around ``n * theta`` with the
    fundamental's band; its frequency correction is divided by ``n`` and the
    corrections are averaged with weights ``a^2 + b^2`` over modes and
    signals.  With a single mode this is the ordinary refinement at that
    harmonic.

    Raises
    ------
    NoConvergence
        With ``err.partial`` set to the :class:`CableResult` of the last iterate.
    """
    r = np.array(prefill_missing(ensemble).values, dtype=float)
    phase0 = initial_phase or harmonic_guess(r, ensemble.times, spec.modes, gn.lam, mode == "robust")
    try:
        phase, envelopes, diag = gauss_newton(r, phase0, mode, gn, alm, harmonics=spec.modes)
    except NoConvergence as exc:
        comp, diag = exc.partial
        n = spec.modes[0]
        partial = _result(ensemble, spec, comp.phase, {n: (comp.envelopes_a, comp.envelopes_b)}, diag)
        raise NoConvergence(str(exc), partial=partial) from exc
    return _result(ensemble, spec, phase, envelopes, diag)


def _result(ensemble, spec, phase, envelopes, diag) -> CableResult:
    omega = phase.frequency() / ensemble.duration
    tension = tension_from_frequency(np.maximum(omega, np.finfo(float).tiny), 1, spec)
    return CableResult(ensemble.physical_times, phase, omega, tension, envelopes, diag.as_dict())


def synthetic_cable(
    seed: int | None = 0,
    *,
    n_samples: int = 1024,
    duration: float = 20.0,
    m_signals: int = 1,
    amplitudes=(1.0, 0.8, 0.6, 0.45, 0.3),
    mean_tension: float = 4.6e6,
    tension_swing: float = 0.05,
    swing_cycles: float = 1.5,
    noise_scale: float = 0.2,
    spec: CableSpec = CableSpec(80.0, 100.0, (1, 2, 3, 4, 5)),
):
    """Multi-harmonic cable record with a slowly varying tension.

    The tension follows ``F0 (1 + s sin(2 pi k t / T))``; the fundamental
    frequency follows from the taut-string law and mode ``n`` contributes
    ``c_n cos(n theta)``.  Each signal scales the modes by a random factor
    in ``[0.5, 1.5]`` and adds ``noise_scale`` times standard normal noise.

    Returns
    -------
    ensemble : SignalEnsemble
        Uncentered, so the stored values are exactly the generated samples.
    truth : dict
        ``times``, ``theta``, ``omega`` (rad/s) and ``tension`` on the sample grid.
    """
    rng = np.random.default_rng(seed)
    times = np.linspace(0.0, duration, n_samples)
    # integrate the frequency on a refined grid so theta is exact to roundoff
    fine = np.linspace(0.0, duration, 16 * (n_samples - 1) + 1)
    tension_fine = mean_tension * (1.0 + tension_swing * np.sin(TWO_PI * swing_cycles * fine / duration))
    omega_fine = frequency_from_tension(tension_fine, spec)
    theta = cumulative_trapezoid(omega_fine, fine, initial=0.0)[::16]
    tension = tension_fine[::16]
    omega = omega_fine[::16]

    clean = sum(c * np.cos(n * theta) for n, c in enumerate(amplitudes, start=1))
    gains = rng.uniform(0.5, 1.5, size=(m_signals, 1))
    values = gains * clean + noise_scale * rng.standard_normal((m_signals, n_samples))
    truth = {"times": times, "theta": theta, "omega": omega, "tension": tension}
    return ingest(times, values, center=False), truth
