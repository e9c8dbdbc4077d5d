"""Core value types: signal ensembles, phases, modes and decomposition results.

All arrays held by these types are marked read-only at construction; the
objects can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import NonMonotoneTime, ShapeMismatch
from .spectral import TWO_PI, FilterSpec, ThetaGrid, derivative_theta, resample_to_theta

MIN_SAMPLES = 16
BAND_TOLERANCE = 1e-6


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SignalEnsemble:
    """``M`` signals sampled on one shared time grid rescaled to ``[0, 1]``.

    ``t_start`` and ``duration`` record the original time axis so frequencies
    can be reported in physical units.  ``offsets`` holds the per-row means
    removed on ingest (zeros when centering is disabled).
    """

    times: np.ndarray
    values: np.ndarray
    mask: np.ndarray
    offsets: np.ndarray
    t_start: float = 0.0
    duration: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "times", _frozen(self.times))
        object.__setattr__(self, "values", _frozen(np.atleast_2d(self.values)))
        object.__setattr__(self, "mask", _frozen(np.atleast_2d(self.mask), bool))
        object.__setattr__(self, "offsets", _frozen(self.offsets))
        n = self.times.size
        if self.values.shape[1] != n or self.mask.shape != self.values.shape:
            raise ShapeMismatch(f"values {self.values.shape} do not match {n} samples")
        if n < MIN_SAMPLES:
            raise ShapeMismatch(f"need at least {MIN_SAMPLES} samples, got {n}")
        if np.any(np.diff(self.times) <= 0):
            raise NonMonotoneTime("times must be strictly increasing")

    @property
    def n_signals(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.times.size

    @property
    def physical_times(self) -> np.ndarray:
        return self.t_start + self.duration * self.times

    @property
    def has_missing(self) -> bool:
        return not bool(self.mask.all())


def ingest(times, values, mask=None, *, center: bool = True) -> SignalEnsemble:
    """Validate raw samples and rescale the time axis to ``[0, 1]``.

    Parameters
    ----------
    times : array_like, shape (N_s,)
        Strictly increasing sample instants.
    values : array_like, shape (M, N_s) or (N_s,)
        One row per signal.  NaN entries count as missing.
    mask : array_like of bool, optional
        ``False`` marks a missing sample.  Combined with the NaN pattern.
    center : bool
        Subtract the mean of the observed samples from every row.
    """
    times = np.asarray(times, dtype=float).ravel()
    try:
        values = np.array(values, dtype=float)
    except ValueError as exc:
        raise ShapeMismatch(f"signal rows have different lengths: {exc}") from None
    if values.ndim == 1:
        values = values[None, :]
    if values.ndim != 2 or values.shape[0] < 1:
        raise ShapeMismatch("values must be a nonempty (M, N_s) matrix")
    for j, row in enumerate(values):
        if row.size != times.size:
            raise ShapeMismatch(f"row {j} has {row.size} samples, times has {times.size}")
    if times.size < 2 or np.any(np.diff(times) <= 0):
        raise NonMonotoneTime("times must be strictly increasing")

    valid = ~np.isnan(values)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim == 1:
            mask = np.broadcast_to(mask, values.shape)
        if mask.shape != values.shape:
            raise ShapeMismatch(f"mask shape {mask.shape} != values shape {values.shape}")
        valid &= mask

    offsets = np.zeros(values.shape[0])
    if center:
        observed = np.where(valid, values, 0.0)
        counts = valid.sum(axis=1)
        offsets = np.divide(observed.sum(axis=1), counts, out=np.zeros_like(offsets), where=counts > 0)
        values = values - offsets[:, None]
    values = np.where(valid, values, np.nan)

    t0, t1 = times[0], times[-1]
    scaled = (times - t0) / (t1 - t0)
    return SignalEnsemble(scaled, values, valid, offsets, float(t0), float(t1 - t0))


@dataclass(frozen=True)
class PhaseFunction:
    """Sampled nondecreasing phase ``theta(t)`` in radians."""

    times: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "times", _frozen(self.times))
        object.__setattr__(self, "theta", _frozen(self.theta))
        if self.theta.shape != self.times.shape:
            raise ShapeMismatch("phase and time grid differ in length")
        steps = np.diff(self.theta)
        if steps.size and steps.min() < -1e-12 * max(1.0, np.abs(self.theta).max()):
            raise ValueError("phase must be nondecreasing")

    @classmethod
    def linear(cls, times, cycles: float, offset: float = 0.0) -> PhaseFunction:
        times = np.asarray(times, dtype=float)
        return cls(times, offset + TWO_PI * cycles * (times - times[0]) / (times[-1] - times[0]))

    @property
    def span(self) -> float:
        return float(self.theta[-1] - self.theta[0])

    @property
    def L_theta(self) -> int:
        """Whole oscillations covered by the phase."""
        return int(np.floor(self.span / TWO_PI + 1e-9))

    @property
    def normalized(self) -> np.ndarray:
        return (self.theta - self.theta[0]) / self.span

    def frequency(self) -> np.ndarray:
        """Instantaneous frequency ``theta'(t)`` in radians per unit time."""
        return derivative_theta(self.theta, self.times)

    def shifted(self, offset: float) -> PhaseFunction:
        return PhaseFunction(self.times, self.theta + offset)


@dataclass(frozen=True)
class ImfComponent:
    """One extracted mode shared by all signals.

    ``envelopes_a[j] * cos(theta)`` is signal ``j``'s share of the mode;
    ``envelopes_b`` is the quadrature part left after phase alignment.
    """

    phase: PhaseFunction
    envelopes_a: np.ndarray
    envelopes_b: np.ndarray
    harmonic: int = 1

    def __post_init__(self):
        object.__setattr__(self, "envelopes_a", _frozen(np.atleast_2d(self.envelopes_a)))
        object.__setattr__(self, "envelopes_b", _frozen(np.atleast_2d(self.envelopes_b)))
        if self.envelopes_a.shape != self.envelopes_b.shape:
            raise ShapeMismatch("in-phase and quadrature envelopes differ in shape")
        if self.envelopes_a.shape[1] != self.phase.times.size:
            raise ShapeMismatch("envelopes do not match the phase grid")

    @property
    def amplitude(self) -> np.ndarray:
        return self.envelopes_a**2 + self.envelopes_b**2

    def frequency_hz(self) -> np.ndarray:
        return self.phase.frequency() / TWO_PI

    def mode_signals(self) -> np.ndarray:
        return self.envelopes_a * np.cos(self.harmonic * self.phase.theta)


def band_leakage(envelope, phase: PhaseFunction, lam: float = 0.5) -> float:
    """Fraction of envelope energy outside ``|omega| < lam * L_theta``.

    The envelope is resampled to a uniform grid in the normalized phase and
    transformed there.  Values below ``BAND_TOLERANCE`` mean the envelope is
    less oscillatory than ``cos(theta)`` in the sense of the dictionary.
    """
    FilterSpec(lam)
    grid = ThetaGrid.periodic(phase)
    g = resample_to_theta(envelope, phase.times, phase, grid)
    spec = np.abs(np.fft.fft(g)) ** 2
    total = spec.sum()
    if total == 0:
        return 0.0
    freqs = np.fft.fftfreq(g.size, 1.0 / g.size)
    outside = np.abs(freqs) >= lam * phase.span / TWO_PI
    return float(spec[outside].sum() / total)


@dataclass(frozen=True)
class DecompositionResult:
    """Components in extraction order plus the final residual matrix."""

    components: tuple[ImfComponent, ...]
    residuals: np.ndarray
    diagnostics: list[dict[str, Any]] = field(default_factory=list)
    stop_reason: str = ""

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "residuals", _frozen(self.residuals))

    @property
    def K(self) -> int:
        return len(self.components)


def reconstruct(result: DecompositionResult, ensemble: SignalEnsemble) -> np.ndarray:
    """Sum of ``a_k^j cos(theta_k)`` over components, one row per signal."""
    out = np.zeros(ensemble.values.shape)
    for comp in result.components:
        out += comp.mode_signals()
    return out
