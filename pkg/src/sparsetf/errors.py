"""Exception hierarchy.

Every error carries an ``exit_code`` so the command-line front end can map
failures to process exit status without a lookup table.
"""


class SparseTFError(Exception):
    exit_code = 1


class InputError(SparseTFError):
    exit_code = 2


class NonMonotoneTime(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class AllMissing(InputError):
    pass


class ZeroResidual(InputError):
    pass


class NonPositiveFrequency(InputError):
    pass


class MissingSamples(InputError):
    """Masked samples given to a mode that cannot absorb them."""


class DegeneratePhase(SparseTFError):
    """Phase covers less than one full oscillation."""

    exit_code = 3


class BandOverflow(SparseTFError):
    """Shifted envelope band runs past the Nyquist bin."""

    exit_code = 3


class ConvergenceError(SparseTFError):
    exit_code = 3


class NoConvergence(ConvergenceError):
    """Raised when the Gauss-Newton loop stalls; ``partial`` holds the last estimate."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class MaxItersExceeded(ConvergenceError):
    """ALM iteration budget exhausted; ``state`` is the last iterate."""

    def __init__(self, message, state=None, residual=None):
        super().__init__(message)
        self.state = state
        self.residual = residual


class ComponentCapReached(UserWarning):
    """Extraction stopped at ``max_components`` with the residual above tolerance."""
