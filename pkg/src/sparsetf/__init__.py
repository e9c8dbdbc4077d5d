"""Joint sparse time-frequency decomposition of signal ensembles.

Every signal in an ensemble is modeled as ``sum_k a_k^j(t) cos(theta_k(t))``
with phases shared across the ensemble.  Components are extracted greedily;
each phase is refined by a Gauss-Newton iteration whose envelope step works
in the phase coordinate, either directly by FFT (periodic data) or through a
group-sparse Fourier extension (nonperiodic data, optionally robust to
outliers and missing samples).
"""

from .cable import CableSpec, harmonic_fuse, synthetic_cable, tension_from_frequency
from .driver import DriverConfig, decompose, initial_phase_guess
from .errors import (
    AllMissing,
    BandOverflow,
    ComponentCapReached,
    ConvergenceError,
    DegeneratePhase,
    InputError,
    MaxItersExceeded,
    MissingSamples,
    NoConvergence,
    NonMonotoneTime,
    NonPositiveFrequency,
    ShapeMismatch,
    SparseTFError,
    ZeroResidual,
)
from .gauss_newton import GnConfig, gauss_newton, refine_component
from .group_sparse import AlmConfig, extend
from .model import (
    DecompositionResult,
    ImfComponent,
    PhaseFunction,
    SignalEnsemble,
    ingest,
    reconstruct,
)
from .robust import extend_robust, prefill_missing
from .spectral import FilterSpec, ThetaGrid
from .synthetic import generate_example1

__version__ = "0.1.0"

__all__ = [
    "AllMissing",
    "AlmConfig",
    "BandOverflow",
    "CableSpec",
    "ComponentCapReached",
    "ConvergenceError",
    "DecompositionResult",
    "DegeneratePhase",
    "DriverConfig",
    "FilterSpec",
    "GnConfig",
    "ImfComponent",
    "InputError",
    "MaxItersExceeded",
    "MissingSamples",
    "NoConvergence",
    "NonMonotoneTime",
    "NonPositiveFrequency",
    "PhaseFunction",
    "ShapeMismatch",
    "SignalEnsemble",
    "SparseTFError",
    "ThetaGrid",
    "ZeroResidual",
    "decompose",
    "extend",
    "extend_robust",
    "gauss_newton",
    "generate_example1",
    "harmonic_fuse",
    "ingest",
    "initial_phase_guess",
    "prefill_missing",
    "reconstruct",
    "refine_component",
    "synthetic_cable",
    "tension_from_frequency",
]
