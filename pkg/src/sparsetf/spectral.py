"""Resampling between time and phase coordinates, and FFT demodulation.

An intrinsic mode ``a(t) cos(theta(t))`` is a pure tone once the signal is
re-sampled uniformly in ``theta``.  The helpers here move data between the
physical time grid and a uniform phase grid with cubic splines, and extract
the slowly varying in-phase / quadrature envelopes with a raised-cosine
low-pass filter applied around the carrier.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import BandOverflow, DegeneratePhase

if TYPE_CHECKING:
    from .model import PhaseFunction

TWO_PI = 2.0 * np.pi
_PERIODIC_PAD = 4


@dataclass(frozen=True)
class FilterSpec:
    """Raised-cosine low-pass filter.

    Parameters
    ----------
    lam : float
        Relative cutoff in ``(0, 1/2]``.  Modes up to ``lam * L`` cycles per
        phase span pass, where ``L`` is the carrier's oscillation count.
    normalize : bool
        Divide by two so the filter peaks at one.  The unnormalized form peaks
        at two and makes a pure cosine demodulate to ``a = 2``.
    """

    lam: float = 0.5
    normalize: bool = True

    def __post_init__(self):
        if not 0.0 < self.lam <= 0.5:
            raise ValueError(f"lam must lie in (0, 1/2], got {self.lam}")


@dataclass(frozen=True)
class ThetaGrid:
    """Uniform grid in the phase coordinate.

    ``n_points`` samples cover ``[start, start + 2*pi*period_factor)`` with the
    right end excluded, so the grid is one period of a periodic sequence.
    """

    start: float
    period_factor: float
    n_points: int

    @property
    def span(self) -> float:
        return TWO_PI * self.period_factor

    @property
    def spacing(self) -> float:
        return self.span / self.n_points

    @property
    def points(self) -> np.ndarray:
        return self.start + self.spacing * np.arange(self.n_points)

    def observed_count(self, phase_span: float) -> int:
        """Number of leading grid points with offset ``<= phase_span``."""
        count = int(np.floor(phase_span / self.spacing * (1.0 + 1e-12))) + 1
        return min(count, self.n_points)

    @classmethod
    def periodic(cls, phase: PhaseFunction, n_points: int | None = None) -> ThetaGrid:
        """Grid whose period is exactly the observed phase span."""
        n = len(phase.theta) if n_points is None else int(n_points)
        return cls(float(phase.theta[0]), phase.span / TWO_PI, n)

    @classmethod
    def extended(
        cls, phase: PhaseFunction, n_points: int | None = None, factor: int = 2
    ) -> ThetaGrid:
        """Grid for the overcomplete basis: ``factor * L_theta`` periods.

        The default ``n_points`` is twice the number of time samples.  If the
        observed span would fill more than three quarters of the grid (only
        possible for tiny ``L_theta``) the period factor is bumped so that an
        extension region remains.
        """
        if phase.span < TWO_PI:
            raise DegeneratePhase("phase span below one oscillation")
        n = 2 * len(phase.theta) if n_points is None else int(n_points)
        if n % 2:
            raise ValueError("extended grid needs an even number of points")
        lbar = factor * phase.L_theta
        while phase.span > 0.75 * TWO_PI * lbar:
            lbar += 1
        return cls(float(phase.theta[0]), float(lbar), n)


def strictly_increasing(x: np.ndarray) -> np.ndarray:
    """Nudge a nondecreasing abscissa so spline construction accepts it."""
    x = np.asarray(x, dtype=float)
    d = np.diff(x)
    if np.all(d > 0):
        return x
    floor = 1e-12 * max(abs(x[-1] - x[0]), 1.0) / max(len(x) - 1, 1)
    d = np.maximum(d, floor)
    return np.concatenate(([x[0]], x[0] + np.cumsum(d)))


def resample_to_theta(signal, times, phase: PhaseFunction, grid: ThetaGrid) -> np.ndarray:
    """Cubic-spline values of ``signal`` at the grid points inside the observed span.

    ``signal`` may be a single row or an ``(M, N_s)`` matrix; interpolation
    acts along the last axis.  Only the leading grid points with
    ``theta <= theta(1)`` are produced.
    """
    span = phase.span
    if span < TWO_PI:
        raise DegeneratePhase(f"phase span {span:.4g} is below 2*pi")
    signal = np.asarray(signal, dtype=float)
    theta = _theta_on(phase, times)
    spline = CubicSpline(strictly_increasing(theta), signal, axis=-1)
    n_obs = grid.observed_count(span)
    return spline(grid.points[:n_obs])


def resample_to_time(values, grid: ThetaGrid, phase: PhaseFunction, times=None) -> np.ndarray:
    """Cubic-spline values of grid data at ``theta(t_i)``.

    When ``values`` covers the whole grid it is treated as one period and
    padded cyclically before the spline is built, so the right end of the
    observed span is interpolated rather than extrapolated.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    x = grid.start + grid.spacing * np.arange(n)
    if n == grid.n_points:
        p = _PERIODIC_PAD
        values = np.concatenate((values[..., -p:], values, values[..., :p]), axis=-1)
        x = grid.start + grid.spacing * np.arange(-p, n + p)
    theta = phase.theta if times is None else _theta_on(phase, times)
    return CubicSpline(x, values, axis=-1)(theta)


def lowpass_filter(omega, spec: FilterSpec):
    """Raised-cosine window ``1 + cos(pi*omega/lam)`` on ``|omega| < lam``."""
    omega = np.asarray(omega, dtype=float)
    scale = 0.5 if spec.normalize else 1.0
    inside = np.abs(omega) < spec.lam
    arg = np.where(inside, omega, spec.lam) / spec.lam
    out = np.where(inside, (1.0 + np.cos(np.pi * arg)) * scale, 0.0)
    return out if out.ndim else float(out)


def demodulate(r_theta, grid: ThetaGrid, L_theta: float, spec: FilterSpec, harmonic: int = 1):
    """In-phase and quadrature envelopes of ``r_theta`` around the carrier.

    The carrier is ``harmonic * theta`` evaluated at the grid points, so the
    result satisfies ``r ~ a cos(h*theta) + b sin(h*theta)``.  Frequencies are
    measured in cycles per grid period and the filter is evaluated at
    ``omega / L_theta``.

    Returns
    -------
    a, b : ndarray
        Real arrays with the shape of ``r_theta``.
    """
    r_theta = np.asarray(r_theta, dtype=float)
    n = r_theta.shape[-1]
    if n != grid.n_points:
        raise ValueError(f"expected {grid.n_points} grid samples, got {n}")
    carrier_bin = harmonic * grid.period_factor
    if spec.lam * L_theta >= n / 2 - carrier_bin:
        raise BandOverflow(
            f"band {spec.lam * L_theta:.1f} around carrier bin {carrier_bin:.1f} "
            f"exceeds Nyquist {n // 2}"
        )
    z = 2.0 * r_theta * np.exp(-1j * harmonic * grid.points)
    freqs = np.fft.fftfreq(n, 1.0 / n)
    chi = lowpass_filter(freqs / L_theta, spec)
    low = np.fft.ifft(np.fft.fft(z, axis=-1) * chi, axis=-1)
    return low.real, -low.imag


def project_lowfreq(delta_omega, phase: PhaseFunction, eta: float) -> np.ndarray:
    """Low-pass projection of a time-grid function in the normalized phase.

    The input is resampled to a uniform grid in the normalized phase, mirrored
    evenly about both ends (no endpoint duplication), filtered with cutoff
    ``eta`` relative to the oscillation count and restricted back.  ``eta = 0``
    projects onto constants and returns the trapezoid mean over that grid.
    """
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    delta_omega = np.asarray(delta_omega, dtype=float)
    n = delta_omega.shape[-1]
    theta_bar = strictly_increasing(phase.normalized)
    u = np.linspace(0.0, 1.0, n)
    g = CubicSpline(theta_bar, delta_omega)(u)
    mirrored = np.concatenate((g, g[-2:0:-1]))
    if eta == 0:
        return np.full(n, mirrored.mean())
    m = len(mirrored)
    # mirrored sequence spans two phase periods
    cycles = np.fft.fftfreq(m, 1.0 / m) / 2.0
    chi = lowpass_filter(cycles / (phase.span / TWO_PI), FilterSpec(min(eta, 0.5), True))
    smooth = np.fft.ifft(np.fft.fft(mirrored) * chi).real[:n]
    return CubicSpline(u, smooth)(theta_bar)


def derivative_theta(values, times) -> np.ndarray:
    """Finite-difference derivative along the last axis.

    Fourth-order five-point stencils in the interior, three-point central
    differences next to the ends and second-order one-sided differences at
    the ends.  Nonuniform grids use the same stencil footprints with weights
    solved from the local Taylor conditions.
    """
    f = np.asarray(values, dtype=float)
    t = np.asarray(times, dtype=float)
    n = t.size
    if n < 5:
        raise ValueError("derivative needs at least 5 samples")
    h = np.diff(t)
    out = np.empty_like(f)
    if np.allclose(h, h[0], rtol=1e-9, atol=0.0):
        h = (t[-1] - t[0]) / (n - 1)
        out[..., 2:-2] = (f[..., :-4] - 8 * f[..., 1:-3] + 8 * f[..., 3:-1] - f[..., 4:]) / (12 * h)
        out[..., 1] = (f[..., 2] - f[..., 0]) / (2 * h)
        out[..., -2] = (f[..., -1] - f[..., -3]) / (2 * h)
        out[..., 0] = (-3 * f[..., 0] + 4 * f[..., 1] - f[..., 2]) / (2 * h)
        out[..., -1] = (3 * f[..., -1] - 4 * f[..., -2] + f[..., -3]) / (2 * h)
        return out

    idx = np.arange(2, n - 2)
    out[..., 2:-2] = _apply_stencil(f, t, idx[:, None] + np.arange(-2, 3), idx)
    edges = np.array([1, n - 2])
    out[..., edges] = _apply_stencil(f, t, edges[:, None] + np.arange(-1, 2), edges)
    out[..., 0] = _apply_stencil(f, t, np.array([[0, 1, 2]]), np.array([0]))[..., 0]
    out[..., -1] = _apply_stencil(f, t, np.array([[n - 3, n - 2, n - 1]]), np.array([n - 1]))[..., 0]
    return out


def _apply_stencil(f, t, nodes, centers):
    # weights w solve sum_j w_j (t_j - t_c)^p = delta_{p,1}, p < stencil width
    offsets = t[nodes] - t[centers][:, None]
    scale = np.abs(offsets).max(axis=1, keepdims=True)
    x = offsets / scale
    width = nodes.shape[1]
    vander = x[:, None, :] ** np.arange(width)[None, :, None]
    rhs = np.zeros((len(centers), width))
    rhs[:, 1] = 1.0
    w = np.linalg.solve(vander, rhs[..., None])[..., 0] / scale
    return np.einsum("...ck,ck->...c", f[..., nodes], w)


def _theta_on(phase: PhaseFunction, times) -> np.ndarray:
    if times is None:
        return phase.theta
    times = np.asarray(times, dtype=float)
    if times.shape == phase.times.shape and np.array_equal(times, phase.times):
        return phase.theta
    return CubicSpline(phase.times, phase.theta)(times)
