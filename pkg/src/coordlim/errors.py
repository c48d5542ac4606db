"""Semantic exception hierarchy shared by all coordlim modules."""


class CoordlimError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CoordlimError, ValueError):
    """Inputs violate a documented precondition or type invariant."""


class CapacityError(CoordlimError, ValueError):
    """The requested computation is too large for the chosen method."""


class ConvergenceError(CoordlimError):
    """An iterative routine did not reach its tolerance.

    Carries the last iterate and the residual it achieved so callers can
    inspect or salvage partial progress.
    """

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class BracketError(CoordlimError):
    """The dual bisection bracket does not contain a sign change."""
