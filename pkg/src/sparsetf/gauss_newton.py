"""Gauss-Newton refinement of one shared phase across an ensemble.

Each iteration extracts per-signal envelopes ``a_j, b_j`` around the current
phase, turns the slow rotation of ``a_j - i b_j`` into a frequency
correction, averages the corrections with weights ``a_j^2 + b_j^2`` and
applies the low-passed, integrated correction with a step that keeps the
phase monotone.  The low-pass cutoff ``eta`` is ramped from zero to the
envelope cutoff ``lam``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import BandOverflow, DegeneratePhase, MaxItersExceeded, NoConvergence
from .group_sparse import AlmConfig, extend, fourier_synthesis
from .model import ImfComponent, PhaseFunction
from .robust import extend_robust, scalar_shrink
from .spectral import (
    TWO_PI,
    FilterSpec,
    ThetaGrid,
    demodulate,
    derivative_theta,
    project_lowfreq,
    resample_to_theta,
    resample_to_time,
)

Mode = Literal["periodic", "nonperiodic", "robust"]
MODES = ("periodic", "nonperiodic", "robust")


@dataclass(frozen=True)
class GnConfig:
    """Gauss-Newton parameters.

    ``epsilon_0`` and ``eta_step`` default to ``1e-6 * sqrt(N_s)`` and
    ``lam / 8`` when left as ``None``.  ``gamma_floor`` is relative to the
    largest envelope power in the current iterate.
    """

    lam: float = 0.5
    epsilon_0: float | None = None
    eta_step: float | None = None
    max_inner_iters: int = 100
    gamma_floor: float = 1e-8
    extension_factor: int = 2

    def __post_init__(self):
        FilterSpec(self.lam)
        if self.epsilon_0 is not None and self.epsilon_0 <= 0:
            raise ValueError("epsilon_0 must be positive")
        if self.eta_step is not None and not 0 < self.eta_step <= self.lam:
            raise ValueError("eta_step must lie in (0, lam]")

    def tolerance(self, n_samples: int) -> float:
        return self.epsilon_0 if self.epsilon_0 is not None else 1e-6 * np.sqrt(n_samples)

    def step(self) -> float:
        return self.eta_step if self.eta_step is not None else self.lam / 8


@dataclass(frozen=True)
class FrequencyUpdate:
    delta_omega_per_signal: np.ndarray
    delta_omega: np.ndarray
    weights: np.ndarray


@dataclass
class PhaseRepresentation:
    """Residuals laid out on a uniform phase grid, ready for demodulation."""

    grid: ThetaGrid
    values: np.ndarray  # (M, N_b), one full grid period
    outliers: np.ndarray | None = None  # (M, N_obs) on the observed grid rows
    alm_iterations: int = 0
    alm_converged: bool = True
    state: object = None  # last ALM state, reusable as a warm start


@dataclass
class RefineDiagnostics:
    stages: list[dict] = field(default_factory=list)
    final_update_norm: float = float("nan")
    alm_failures: int = 0
    alm_iterations: int = 0
    zero_steps: int = 0
    outliers: np.ndarray | None = None
    grid: ThetaGrid | None = None
    sample_outliers: np.ndarray | None = None

    def as_dict(self) -> dict:
        return {
            "stages": self.stages,
            "final_update_norm": self.final_update_norm,
            "alm_failures": self.alm_failures,
            "alm_iterations": self.alm_iterations,
            "zero_steps": self.zero_steps,
        }


def phase_representation(
    residuals,
    phase: PhaseFunction,
    mode: Mode = "periodic",
    config: GnConfig = GnConfig(),
    alm: AlmConfig = AlmConfig(),
    warm: PhaseRepresentation | None = None,
) -> PhaseRepresentation:
    """Resample residual rows to the phase grid, extending them if nonperiodic.

    ``warm`` is a previous representation; its ALM state seeds the extension
    when the grid has the same period factor and size.
    """
    r = np.atleast_2d(np.asarray(residuals, dtype=float))
    if mode == "periodic":
        grid = ThetaGrid.periodic(phase)
        return PhaseRepresentation(grid, resample_to_theta(r, phase.times, phase, grid))
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")

    grid = ThetaGrid.extended(phase, factor=config.extension_factor)
    observed = resample_to_theta(r, phase.times, phase, grid).T
    converged = True
    init = None
    if warm is not None and warm.state is not None and warm.grid.period_factor == grid.period_factor:
        init = warm.state
    try:
        if mode == "robust":
            state = extend_robust(observed, grid, alm, init=init)
        else:
            state = extend(observed, grid, alm, init=init)
    except MaxItersExceeded as err:
        state, converged = err.state, False
    if mode == "robust":
        coeffs, outliers = state.coeffs, state.Z.T
    else:
        coeffs, outliers = state, None
    values = fourier_synthesis(coeffs.X).real.T
    return PhaseRepresentation(grid, values, outliers, coeffs.iterations, converged, state)


def envelopes_from_representation(rep: PhaseRepresentation, phase: PhaseFunction, lam: float, harmonic: int = 1):
    a_th, b_th = demodulate(rep.values, rep.grid, rep.grid.period_factor, FilterSpec(lam), harmonic)
    return resample_to_time(a_th, rep.grid, phase), resample_to_time(b_th, rep.grid, phase)


def envelope_step(
    residual,
    phase: PhaseFunction,
    mode: Mode = "periodic",
    config: GnConfig = GnConfig(),
    alm: AlmConfig = AlmConfig(),
    harmonic: int = 1,
):
    """Least-squares envelopes ``a, b`` with ``r ~ a cos(h theta) + b sin(h theta)``.

    Returns two ``(M, N_s)`` arrays (a single input row gives ``M = 1``).
    """
    if phase.L_theta < 1:
        raise DegeneratePhase("phase covers less than one oscillation")
    rep = phase_representation(residual, phase, mode, config, alm)
    return envelopes_from_representation(rep, phase, config.lam, harmonic)


def frequency_update(a, b, times, config: GnConfig = GnConfig()) -> FrequencyUpdate:
    """Per-signal frequency corrections and their power-weighted average."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise ValueError("a and b must have the same shape")
    da = derivative_theta(a, times)
    db = derivative_theta(b, times)
    power = a**2 + b**2
    floor = config.gamma_floor * power.max() if power.size else 0.0
    per_signal = (a * db - b * da) / (power + floor)
    total = power.sum(axis=0)
    weighted = (per_signal * power).sum(axis=0)
    avg = np.divide(weighted, total, out=np.zeros_like(total), where=total > floor)
    return FrequencyUpdate(per_signal, avg, power)


def pool_updates(updates: Sequence[FrequencyUpdate], harmonics: Sequence[int]) -> np.ndarray:
    """Combine harmonic updates after rescaling each to the fundamental."""
    if len(updates) == 1 and harmonics[0] == 1:
        return updates[0].delta_omega
    weighted = sum((u.delta_omega_per_signal / n * u.weights).sum(axis=0) for u, n in zip(updates, harmonics))
    total = sum(u.weights.sum(axis=0) for u in updates)
    peak = max(u.weights.max() for u in updates)
    floor = 1e-8 * peak if peak > 0 else 0.0
    return np.divide(weighted, total, out=np.zeros_like(total), where=total > floor)


def max_monotone_step(theta, delta_theta) -> float:
    """Largest ``alpha`` in ``[0, 1]`` keeping ``theta - alpha * delta_theta`` nondecreasing."""
    d = np.diff(theta)
    dd = np.diff(delta_theta)
    grow = dd > 0
    if not grow.any():
        return 1.0
    return float(np.clip(np.min(np.maximum(d[grow], 0.0) / dd[grow]), 0.0, 1.0))


def phase_update(phase: PhaseFunction, delta_omega, eta: float, config: GnConfig = GnConfig()):
    """Apply a low-passed frequency correction; returns ``(new_phase, beta)``."""
    delta_omega = np.asarray(delta_omega, dtype=float)
    if not np.any(delta_omega):
        return phase, 1.0
    slope = project_lowfreq(delta_omega, phase, eta)
    delta_theta = cumulative_trapezoid(slope, phase.times, initial=0.0)
    beta = max_monotone_step(phase.theta, delta_theta)
    new = phase.theta - beta * delta_theta
    # clamp rounding below zero on intervals where the step bound is active
    new = np.maximum.accumulate(new)
    return PhaseFunction(phase.times, new), beta


def align_phase(phase: PhaseFunction, a, b) -> PhaseFunction:
    """Absorb the mean quadrature rotation into a constant phase offset.

    The phase updates never move ``theta(0)``, so a constant offset between
    the estimate and the data survives as a nonzero ``b``.  The offset is
    resolved modulo ``pi`` so that envelopes may change sign across signals.
    """
    z = np.asarray(a) - 1j * np.asarray(b)
    s = np.sum(z * z)
    if abs(s) == 0:
        return phase
    return phase.shifted(0.5 * np.angle(s))


def gauss_newton(
    residuals,
    initial_phase: PhaseFunction,
    mode: Mode = "periodic",
    config: GnConfig = GnConfig(),
    alm: AlmConfig = AlmConfig(),
    harmonics: Sequence[int] = (1,),
):
    """Run the continuation loop; returns ``(phase, envelopes, diagnostics)``.

    ``envelopes`` maps each harmonic to its ``(a, b)`` pair evaluated at the
    final phase.  With several harmonics the phase is the fundamental and
    mode ``n`` is demodulated around ``n * theta`` with the fundamental's
    bandwidth.
    """
    r = np.atleast_2d(np.asarray(residuals, dtype=float))
    phase = initial_phase
    if phase.L_theta < 1:
        raise DegeneratePhase("initial phase covers less than one oscillation")
    harmonics = tuple(int(n) for n in harmonics)
    eps0 = config.tolerance(r.shape[1])
    step = config.step()
    diag = RefineDiagnostics()

    eta = 0.0
    norm = np.inf
    hit_cap = False
    rep = None
    last = None
    while eta < config.lam - 1e-12:
        betas = []
        for it in range(1, config.max_inner_iters + 1):
            try:
                rep = phase_representation(r, phase, mode, config, alm, warm=rep)
                updates, first = [], None
                for n in harmonics:
                    a, b = envelopes_from_representation(rep, phase, config.lam, n)
                    if first is None:
                        first = (a, b)
                    updates.append(frequency_update(a, b, phase.times, config))
            except BandOverflow as exc:
                if last is None:
                    raise
                partial = ImfComponent(last[0], *last[1], harmonics[0])
                raise NoConvergence(f"phase ran away: {exc}", partial=(partial, diag)) from exc
            last = (phase, first)
            diag.alm_failures += not rep.alm_converged
            diag.alm_iterations += rep.alm_iterations
            delta_omega = pool_updates(updates, harmonics)
            new_phase, beta = phase_update(phase, delta_omega, eta, config)
            betas.append(beta)
            diag.zero_steps += beta == 0.0
            norm = float(np.linalg.norm(new_phase.theta - phase.theta))
            phase = new_phase
            if phase.L_theta < 1:
                raise DegeneratePhase("phase collapsed below one oscillation")
            if norm <= eps0:
                break
        hit_cap = norm > eps0
        diag.stages.append(
            {"eta": eta, "iterations": it, "update_norm": norm, "min_beta": float(min(betas))}
        )
        eta += step
    diag.final_update_norm = norm

    if harmonics == (1,):
        rep = phase_representation(r, phase, mode, config, alm, warm=rep)
        a, b = envelopes_from_representation(rep, phase, config.lam)
        phase = align_phase(phase, a, b)

    rep = phase_representation(r, phase, mode, config, alm, warm=rep)
    envelopes = {n: envelopes_from_representation(rep, phase, config.lam, n) for n in harmonics}
    if rep.outliers is not None:
        diag.outliers = rep.outliers
        diag.grid = rep.grid
        # the outlier step evaluated at the samples against the final fit
        fit = resample_to_time(rep.values, rep.grid, phase)
        diag.sample_outliers = scalar_shrink(r - fit, rep.state.threshold)

    if hit_cap and norm > 100 * eps0:
        a, b = envelopes[harmonics[0]]
        partial = ImfComponent(phase, a, b, harmonics[0])
        raise NoConvergence(
            f"phase update norm {norm:.3g} above {100 * eps0:.3g} after "
            f"{config.max_inner_iters} iterations",
            partial=(partial, diag),
        )
    return phase, envelopes, diag


def refine_component(
    residuals,
    initial_phase: PhaseFunction,
    mode: Mode = "periodic",
    config: GnConfig = GnConfig(),
    alm: AlmConfig = AlmConfig(),
):
    """Fit one mode shared by all rows of ``residuals``.

    Returns ``(component, diagnostics)``.

    Raises
    ------
    NoConvergence
        If the final stage exhausts ``max_inner_iters`` with an update norm
        above ``100 * epsilon_0``; ``err.partial`` holds the last estimate.
    """
    phase, env, diag = gauss_newton(residuals, initial_phase, mode, config, alm)
    a, b = env[1]
    return ImfComponent(phase, a, b), diag


def instantaneous_frequency(phase: PhaseFunction) -> np.ndarray:
    """``theta'(t) / 2 pi`` on the phase's time grid."""
    return phase.frequency() / TWO_PI
