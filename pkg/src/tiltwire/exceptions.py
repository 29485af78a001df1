"""Exception types raised by the library."""


class AdmissibilityError(ValueError):
    """Parameters do not describe an admissible embedded eigenvalue."""


class RegionError(ValueError):
    """A complex energy lies outside the region where the continuation is valid."""


class ConvergenceError(RuntimeError):
    """An iterative or truncated computation failed to meet its tolerance.

    The best available estimate is kept on the exception so callers can
    still report it.
    """

    def __init__(self, message, estimate=None, error=None, **info):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
        self.info = info


class TruncationError(ConvergenceError):
    """A mode sum did not settle within the allowed truncation."""


class NearSingularError(RuntimeError):
    """The reduced linear system is too ill-conditioned to trust."""

    def __init__(self, message, cond=None):
        super().__init__(message)
        self.cond = cond
