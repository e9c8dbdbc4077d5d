"""Joint sparse Fourier extension of several signals in the phase coordinate.

The observed part of each signal occupies the leading rows ``Omega`` of a
uniform phase grid that is twice as long as the data.  The extension solves

    min ||X||_{2,1}   subject to   (Phi X)|_Omega = F

with ``Phi`` the unitary inverse DFT, using an augmented Lagrangian split:
a slack ``Y`` carries the unconstrained rows outside ``Omega`` and the
multiplier ``Q`` enforces the data rows.  Every step is closed form; the
coefficient step is a row-wise group soft threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MaxItersExceeded
from .spectral import ThetaGrid


@dataclass(frozen=True)
class AlmConfig:
    """ALM parameters.

    ``tol`` is relative: iteration stops once ``||Q^k - Q^{k-1}||_2`` drops
    below ``tol * ||F||_2``.  With ``gamma_rule="rpca"`` the penalty is set
    from the data as ``n / (4 ||F|_Omega||_1)`` over the ``n`` observed
    entries, the usual choice for sparse-plus-structured splits, and
    ``gamma`` is ignored.
    """

    gamma: float = 1.0
    tol: float = 1e-6
    max_iters: int = 500
    gamma_rule: str = "fixed"

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.gamma_rule not in ("fixed", "rpca"):
            raise ValueError(f"unknown gamma_rule {self.gamma_rule!r}")

    def penalty(self, F_bar, mask) -> float:
        """Penalty ``gamma`` for the given padded data."""
        if self.gamma_rule == "fixed":
            return self.gamma
        observed = np.abs(F_bar[mask])
        total = observed.sum()
        return observed.size / (4.0 * total) if total > 0 else self.gamma


@dataclass(frozen=True)
class GroupCoefficients:
    X: np.ndarray
    Y_bar: np.ndarray
    Q: np.ndarray
    F_bar: np.ndarray
    omega_mask: np.ndarray
    iterations: int = 0
    converged: bool = False

    def extension(self) -> np.ndarray:
        """Synthesized periodic signals on the full grid, ``(N_b, M)``."""
        return fourier_synthesis(self.X).real


def group_norm(X) -> float:
    """Sum of the Euclidean norms of the rows."""
    X = np.asarray(X)
    return float(np.linalg.norm(X, axis=1).sum()) if X.size else 0.0


def group_shrink(V, threshold: float) -> np.ndarray:
    """Row-wise group soft threshold.

    Each row ``v`` becomes ``(|v| - threshold) / |v| * v`` when its norm
    exceeds ``threshold`` and zero otherwise.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    V = np.asarray(V)
    norms = np.linalg.norm(V, axis=1, keepdims=True)
    safe = np.where(norms > 0, norms, 1.0)
    scale = np.where(norms > threshold, (norms - threshold) / safe, 0.0)
    return V * scale


def fourier_synthesis(X) -> np.ndarray:
    """Apply the unitary Fourier matrix column-wise (``Phi @ X``)."""
    return np.fft.ifft(np.asarray(X), axis=0, norm="ortho")


def fourier_analysis(G) -> np.ndarray:
    """Adjoint of :func:`fourier_synthesis`."""
    return np.fft.fft(np.asarray(G), axis=0, norm="ortho")


def omega_mask(grid: ThetaGrid, phase_span: float) -> np.ndarray:
    mask = np.zeros(grid.n_points, dtype=bool)
    mask[: grid.observed_count(phase_span)] = True
    return mask


def zero_pad(F_observed, n_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Embed observed rows at the head of an ``n_points``-row zero matrix."""
    F = np.asarray(F_observed, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    n_obs = F.shape[0]
    if n_obs > n_points:
        raise ValueError(f"{n_obs} observed rows exceed grid of {n_points}")
    F_bar = np.zeros((n_points, F.shape[1]))
    F_bar[:n_obs] = F
    mask = np.zeros(n_points, dtype=bool)
    mask[:n_obs] = True
    return F_bar, mask


def extend(
    F_observed, grid: ThetaGrid, cfg: AlmConfig = AlmConfig(), init: GroupCoefficients | None = None
) -> GroupCoefficients:
    """Group-sparse Fourier coefficients of the observed rows.

    Parameters
    ----------
    F_observed : array_like, shape (N_obs, M)
        Signals resampled on the first ``N_obs`` grid points, one per column.
    grid : ThetaGrid
        Full extension grid with ``N_b`` points.
    init : GroupCoefficients, optional
        Warm start.  Its ``X``, ``Y_bar`` and ``Q`` seed the iteration after
        being re-masked to the current observed rows.

    Raises
    ------
    MaxItersExceeded
        If ``cfg.max_iters`` is reached first; ``err.state`` is the last iterate.
    """
    F_bar, mask = zero_pad(F_observed, grid.n_points)
    coeffs, _ = _alm(F_bar, mask, cfg, z_threshold=None, init=_warm(init, None, F_bar.shape))
    if not coeffs.converged:
        raise MaxItersExceeded(
            f"ALM did not reach tol after {cfg.max_iters} iterations",
            state=coeffs,
            residual=constraint_residual(coeffs.X, F_bar, mask),
        )
    return coeffs


def constraint_residual(X, F_bar, mask) -> float:
    """``||(Phi X - F)|_Omega||_2``."""
    return float(np.linalg.norm((fourier_synthesis(X) - F_bar)[mask]))


def _warm(init: GroupCoefficients | None, Z, shape):
    if init is None or init.X.shape != shape:
        return None
    return init.X, init.Y_bar, init.Q, Z


def _alm(F_bar, mask, cfg: AlmConfig, z_threshold=None, q_update: str = "consistent", init=None):
    # Shared loop for the plain and the outlier-robust extension.  With
    # z_threshold None the outlier block is absent and the arithmetic is that
    # of the plain solver.
    gamma = cfg.penalty(F_bar, mask)
    n, m = F_bar.shape
    off = ~mask
    X = np.zeros((n, m), dtype=complex)
    Y = np.zeros((n, m), dtype=complex)
    Q = np.zeros((n, m), dtype=complex)
    Z = np.zeros((n, m)) if z_threshold is not None else None
    if init is not None:
        X = np.array(init[0], dtype=complex)
        Y = np.where(off[:, None], init[1], 0.0)
        Q = np.where(mask[:, None], init[2], 0.0)
        if Z is not None and init[3] is not None:
            Z = np.where(mask[:, None], init[3], 0.0)
    scale = np.linalg.norm(F_bar)
    if Z is not None and scale > 0:
        # measure the tolerance against the data with outliers clipped
        obs = F_bar[mask]
        med = np.median(obs, axis=0)
        spread = 3.0 * 1.4826 * np.median(np.abs(obs - med), axis=0)
        scale = np.linalg.norm(np.clip(obs, med - spread, med + spread)) or scale
    tol = cfg.tol * scale
    if scale == 0:
        return GroupCoefficients(X, Y, Q, F_bar, mask, 1, True), Z

    for it in range(1, cfg.max_iters + 1):
        target = Y + F_bar + Q / gamma if Z is None else Y - Z + F_bar + Q / gamma
        X = group_shrink(fourier_analysis(target), 1.0 / gamma)
        PX = fourier_synthesis(X)
        if Z is None:
            Y = np.where(off[:, None], PX - F_bar - Q / gamma, 0.0)
        else:
            Y = np.where(off[:, None], PX + Z - F_bar - Q / gamma, 0.0)
            arg = (Y + F_bar + Q / gamma - PX).real
            Z = np.where(mask[:, None], scalar_shrink(arg, z_threshold), 0.0)
        if Z is None:
            dQ = gamma * (Y - PX + F_bar)
        elif q_update == "consistent":
            dQ = gamma * (Y - PX - Z + F_bar)
        else:
            dQ = gamma * (Z - PX + F_bar)
        Q = Q + dQ
        if np.linalg.norm(dQ) <= tol:
            return GroupCoefficients(X, Y, Q, F_bar, mask, it, True), Z

    return GroupCoefficients(X, Y, Q, F_bar, mask, cfg.max_iters, False), Z


def scalar_shrink(x, threshold: float):
    """Elementwise soft threshold ``sign(x) * max(|x| - threshold, 0)``."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    x = np.asarray(x, dtype=float)
    if np.isinf(threshold):
        return np.zeros_like(x)
    out = np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)
    return out if out.ndim else float(out)
