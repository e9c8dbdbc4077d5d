"""Outlier-robust extension and missing-sample handling.

Outliers are modeled as an entrywise sparse matrix ``Z`` on the observed
rows, so the constraint becomes ``(Phi X)|_Omega + Z = F`` and the objective
adds ``||Z||_1``.  Missing samples are filled with the row mean and left for
the outlier term to absorb.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import AllMissing, MaxItersExceeded
from .group_sparse import (
    AlmConfig,
    GroupCoefficients,
    _alm,
    _warm,
    constraint_residual,
    scalar_shrink,
    zero_pad,
)
from .model import SignalEnsemble
from .spectral import ThetaGrid

__all__ = ["RobustState", "extend_robust", "prefill_missing", "scalar_shrink"]


@dataclass(frozen=True)
class RobustState:
    coeffs: GroupCoefficients
    Z_bar: np.ndarray
    threshold: float = 1.0

    @property
    def Z(self) -> np.ndarray:
        """Outlier estimate restricted to the observed rows."""
        return self.Z_bar[self.coeffs.omega_mask]


def extend_robust(
    F_observed,
    grid: ThetaGrid,
    cfg: AlmConfig = AlmConfig(),
    *,
    z_threshold: float | None = None,
    q_update: str = "consistent",
    init: RobustState | None = None,
) -> RobustState:
    """Group-sparse coefficients plus an ``l1`` outlier matrix.

    Parameters
    ----------
    z_threshold : float, optional
        Soft threshold of the outlier step, ``1/gamma`` by default.  Passing
        ``inf`` disables the outlier block.
    q_update : {"consistent", "literal"}
        ``"consistent"`` updates the multiplier with the same residual that
        the primal steps minimize.  ``"literal"`` drops the slack term and
        flips the sign of ``Z``, as the algorithm is sometimes written; it is
        kept for comparison and is not expected to converge in general.
    init : RobustState, optional
        Warm start from a previous solve on a grid of the same size.
    """
    if q_update not in ("consistent", "literal"):
        raise ValueError(f"unknown q_update {q_update!r}")
    F_bar, mask = zero_pad(F_observed, grid.n_points)
    thr = 1.0 / cfg.penalty(F_bar, mask) if z_threshold is None else z_threshold
    warm = None if init is None else _warm(init.coeffs, init.Z_bar, F_bar.shape)
    coeffs, Z = _alm(F_bar, mask, cfg, z_threshold=thr, q_update=q_update, init=warm)
    state = RobustState(coeffs, Z, thr)
    if not coeffs.converged:
        raise MaxItersExceeded(
            f"robust ALM did not reach tol after {cfg.max_iters} iterations",
            state=state,
            residual=constraint_residual(coeffs.X, F_bar - Z, mask),
        )
    return state


def prefill_missing(ensemble: SignalEnsemble) -> SignalEnsemble:
    """Replace missing samples with the mean of the observed samples of their row."""
    if not ensemble.has_missing:
        return ensemble
    values = np.array(ensemble.values)
    for j, (row, ok) in enumerate(zip(values, ensemble.mask)):
        if not ok.any():
            raise AllMissing(f"row {j} has no observed samples")
        row[~ok] = row[ok].mean()
    return replace(ensemble, values=values)

