"""Greedy matching-pursuit decomposition of a signal ensemble.

Components are peeled off one at a time: guess a phase from the spectrum of
the current residual, refine it with the Gauss-Newton solver, subtract
``a_j cos(theta)`` from every row and repeat until the residual is small,
the component cap is hit or a new component stops paying for itself.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np

from .errors import ComponentCapReached, MissingSamples, NoConvergence, ZeroResidual
from .gauss_newton import MODES, GnConfig, Mode, refine_component
from .group_sparse import AlmConfig
from .model import DecompositionResult, ImfComponent, PhaseFunction, SignalEnsemble
from .robust import prefill_missing
from .spectral import TWO_PI

Guess = Literal["periodogram", "chirplet"]

# ALM settings used inside the solver loop; see AlmConfig for the standalone defaults
SOLVER_ALM = AlmConfig(tol=1e-3)


@dataclass(frozen=True)
class DriverConfig:
    """Outer-loop settings.

    Parameters
    ----------
    residual_tol : float
        Stop once ``max_j ||r_j|| / ||f_j||`` falls to this level.
    max_components : int
        Upper bound on the number of extracted components.
    mode : {"periodic", "nonperiodic", "robust"}
        Solver used for every component.
    initial_phases : sequence of PhaseFunction
        User phases, consumed in extraction order before any guessing.
    min_energy_reduction : float
        A component removing less than this fraction of the residual energy
        is discarded and extraction stops.
    guess : {"periodogram", "chirplet"}
        ``"periodogram"`` starts from ``2 pi L* t`` at the strongest integer
        frequency.  ``"chirplet"`` also scans linear chirp rates and starts
        from ``2 pi (L t + c t^2)``; it is far less sensitive to noise when
        the frequency sweeps widely.
    max_chirp : float, optional
        Largest ``|c|`` scanned by the chirplet guess, in cycles.  Defaults to
        an eighth of the sample count.
    """

    residual_tol: float = 1e-2
    max_components: int = 8
    mode: Mode = "nonperiodic"
    gn: GnConfig = GnConfig()
    alm: AlmConfig = SOLVER_ALM
    initial_phases: Sequence[PhaseFunction] = field(default_factory=tuple)
    min_energy_reduction: float = 1e-3
    guess: Guess = "periodogram"
    max_chirp: float | None = None

    def __post_init__(self):
        if self.residual_tol <= 0:
            raise ValueError("residual_tol must be positive")
        if self.max_components < 1:
            raise ValueError("max_components must be at least 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.guess not in ("periodogram", "chirplet"):
            raise ValueError(f"unknown guess {self.guess!r}")
        object.__setattr__(self, "initial_phases", tuple(self.initial_phases))


def _quadrature_weights(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    w = np.empty_like(t)
    w[1:-1] = 0.5 * (t[2:] - t[:-2])
    w[0] = 0.5 * (t[1] - t[0])
    w[-1] = 0.5 * (t[-1] - t[-2])
    return w


def winsorize(residuals, k: float = 3.0) -> np.ndarray:
    """Clip each row to ``median +- k`` robust standard deviations (MAD based)."""
    r = np.atleast_2d(np.asarray(residuals, dtype=float))
    med = np.median(r, axis=1, keepdims=True)
    mad = 1.4826 * np.median(np.abs(r - med), axis=1, keepdims=True)
    return np.clip(r, med - k * mad, med + k * mad)


def _max_bin(n_samples: int, lam: float) -> int:
    # the demodulation band L(1 + lam) has to stay below Nyquist
    return max(1, int(np.ceil(n_samples / (2.0 * (1.0 + lam)))) - 1)


def periodogram(residuals, times, max_bin: int | None = None):
    """Row-averaged power at integer frequencies ``1..max_bin``.

    Returns ``(bins, power)``.  The transform uses trapezoid weights, so
    nonuniform sample times are handled.
    """
    r = np.atleast_2d(np.asarray(residuals, dtype=float))
    t = np.asarray(times, dtype=float)
    if max_bin is None:
        max_bin = (t.size - 1) // 2
    bins = np.arange(1, max_bin + 1)
    basis = np.exp(-2j * np.pi * np.outer(t, bins)) * _quadrature_weights(t)[:, None]
    return bins, (np.abs(r @ basis) ** 2).mean(axis=0)


def _chirplet(r, t, max_bin: int, max_chirp: float):
    bins = np.arange(1, max_bin + 1)
    basis = np.exp(-2j * np.pi * np.outer(t, bins)) * _quadrature_weights(t)[:, None]
    best = (-np.inf, 1, 0.0)
    for c in np.arange(-max_chirp, max_chirp + 0.25, 0.5):
        end = bins + 2 * c
        ok = (end > 0) & (end <= max_bin)
        if not ok.any():
            continue
        power = (np.abs((r * np.exp(-2j * np.pi * c * t * t)) @ basis) ** 2).mean(axis=0)
        power = np.where(ok, power, -np.inf)
        k = int(np.argmax(power))
        if power[k] > best[0]:
            best = (power[k], int(bins[k]), float(c))
    return best


def initial_phase_guess(
    residuals,
    times,
    *,
    guess: Guess = "periodogram",
    lam: float = 0.5,
    robust: bool = False,
    max_chirp: float | None = None,
) -> PhaseFunction:
    """Starting phase for the next component.

    ``"periodogram"`` returns ``2 pi L* t`` with ``L*`` the strongest integer
    frequency of the row-averaged periodogram.  ``"chirplet"`` maximizes the
    same average over linear chirps ``exp(-2 pi i (L t + c t^2))`` with ``c``
    on a half-cycle grid; ``c = 0`` reproduces the periodogram.  Frequencies
    are limited so the envelope band ``L (1 + lam)`` stays below Nyquist.
    With ``robust`` the rows are winsorized first so isolated spikes do not
    dominate the spectrum.

    Raises
    ------
    ZeroResidual
        If every row is zero.
    """
    r = np.atleast_2d(np.asarray(residuals, dtype=float))
    t = np.asarray(times, dtype=float)
    if not np.any(r):
        raise ZeroResidual("residual is identically zero")
    if robust:
        r = winsorize(r)
    t = (t - t[0]) / (t[-1] - t[0])
    top = _max_bin(t.size, lam)
    if guess == "chirplet":
        limit = t.size / 8.0 if max_chirp is None else float(max_chirp)
        _, L, c = _chirplet(r, t, top, limit)
        return PhaseFunction(np.asarray(times, dtype=float), TWO_PI * (L * t + c * t * t))
    bins, power = periodogram(r, t, top)
    L = int(bins[np.argmax(power)])
    return PhaseFunction.linear(times, L)


def _relative_norms(r, norms0) -> np.ndarray:
    norms = np.linalg.norm(r, axis=1)
    return np.divide(norms, norms0, out=np.zeros_like(norms), where=norms0 > 0)


def decompose(ensemble: SignalEnsemble, cfg: DriverConfig = DriverConfig()) -> DecompositionResult:
    """Extract components until the residual criterion is met.

    Missing samples are filled with row means and require ``mode="robust"``.

    Raises
    ------
    MissingSamples
        If the ensemble has masked samples and the mode is not robust.
    NoConvergence
        If the solver stalls; ``err.partial`` is a :class:`DecompositionResult`
        holding the components so far plus the stalled one.
    """
    if ensemble.has_missing:
        if cfg.mode != "robust":
            raise MissingSamples("masked samples need mode='robust'")
        ensemble = prefill_missing(ensemble)
    times = ensemble.times
    r = np.array(ensemble.values, dtype=float)
    norms0 = np.linalg.norm(r, axis=1)
    components: list[ImfComponent] = []
    diagnostics: list[dict] = []
    if not np.any(r):
        return DecompositionResult((), r, diagnostics, "zero ensemble")

    stop = "max_components"
    for k in range(cfg.max_components):
        if _relative_norms(r, norms0).max() <= cfg.residual_tol:
            stop = "residual_tol"
            break
        if k < len(cfg.initial_phases):
            phase0 = cfg.initial_phases[k]
        else:
            phase0 = initial_phase_guess(
                r, times, guess=cfg.guess, lam=cfg.gn.lam, robust=cfg.mode == "robust",
                max_chirp=cfg.max_chirp,
            )
        try:
            comp, diag = refine_component(r, phase0, cfg.mode, cfg.gn, cfg.alm)
        except NoConvergence as exc:
            comp, diag = exc.partial
            rest = r - comp.mode_signals()
            partial = DecompositionResult(
                components + [comp], rest, diagnostics + [diag.as_dict()], "no_convergence"
            )
            raise NoConvergence(str(exc), partial=partial) from exc

        record = diag.as_dict()
        record["initial_cycles"] = phase0.span / TWO_PI
        if diag.outliers is not None:
            record["outliers"] = diag.sample_outliers
        diagnostics.append(record)
        if comp.phase.L_theta < 1:
            record["rejected"] = "degenerate phase"
            stop = "degenerate_phase"
            break
        rest = r - comp.mode_signals()
        before = float(np.sum(r**2))
        reduction = 1.0 - float(np.sum(rest**2)) / before
        record["energy_reduction"] = reduction
        if reduction < cfg.min_energy_reduction:
            record["rejected"] = "energy reduction below threshold"
            stop = "negligible_energy"
            break
        if np.linalg.norm(rest, axis=1).max() > np.linalg.norm(r, axis=1).max():
            record["rejected"] = "residual norm increased"
            stop = "residual_increase"
            break
        components.append(comp)
        r = rest
    else:
        if _relative_norms(r, norms0).max() <= cfg.residual_tol:
            stop = "residual_tol"
        else:
            warnings.warn(
                f"stopped at {cfg.max_components} components above residual_tol",
                ComponentCapReached,
                stacklevel=2,
            )
    return DecompositionResult(tuple(components), r, diagnostics, stop)


def decompose_separately(ensemble: SignalEnsemble, cfg: DriverConfig = DriverConfig()):
    """Decompose every row on its own; returns one result (or error) per row."""
    out = []
    for j in range(ensemble.n_signals):
        row = replace(
            ensemble,
            values=ensemble.values[j : j + 1],
            mask=ensemble.mask[j : j + 1],
            offsets=ensemble.offsets[j : j + 1],
        )
        try:
            out.append(decompose(row, cfg))
        except NoConvergence as exc:
            out.append(exc.partial)
    return out
