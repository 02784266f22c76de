"""Exception taxonomy.

Two broad classes matter to callers: violated preconditions (bad requests,
exit code 2 at the command line) and numerical failures discovered mid-run
(exit code 3).  Everything raised by this package derives from WormymError.
"""


class WormymError(Exception):
    """Base class for all package errors."""


class PreconditionError(WormymError):
    """The request itself is invalid (bad parameters, no such solution)."""


class NumericalError(WormymError):
    """A numerical procedure failed to produce a trustworthy answer."""


class NoSuchSolutionError(PreconditionError):
    """A static solution with the requested zero count does not exist."""


class IntegerEllError(PreconditionError):
    """Integer ell sits on a bifurcation; the solution catalogue is ambiguous."""


class DomainError(PreconditionError):
    """Evaluation point outside [-1, 1]."""


class InsufficientDataError(PreconditionError):
    """Too few samples in the fit window."""


class InsufficientOscillationError(PreconditionError):
    """Ringdown fit requested on a signal with too few oscillations."""


class NotSeparatingFamilyError(PreconditionError):
    """Bisection endpoints relax to the same attractor."""


class BlowupError(NumericalError):
    """The integration left the regime of validity (non-finite state)."""

    def __init__(self, message, last_valid=None):
        super().__init__(message)
        self.last_valid = last_valid


class BracketFailureError(NumericalError):
    """Shooting bisection could not maintain or locate a bracket."""


class EnergyInconsistencyError(NumericalError):
    """Independent quadratures of the same energy disagree."""


class ResolutionError(NumericalError):
    """Spectral resolution too low: no mode survived the two-grid filter."""


class StiffnessError(NumericalError):
    """The time integrator stalled (step size collapse)."""


class ScalingUndefinedError(NumericalError):
    """A lifetime-scaling fit was requested but orbits never visit the attractor."""
