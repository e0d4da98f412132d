"""Exception types shared across the package."""


class LoudError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(LoudError, ValueError):
    """Input lies outside the region where an operation is defined."""


class DegenerateError(LoudError, ValueError):
    """A quantity that must be non-degenerate (discriminant, leading coefficient) vanishes."""


class PoleError(LoudError, ZeroDivisionError):
    """A Gamma-type function was evaluated at one of its poles."""


class EscapeError(LoudError, RuntimeError):
    """A trajectory left the bounding box before reaching the return section."""


class StepLimitError(LoudError, RuntimeError):
    """The integrator exhausted its step budget."""


class UnsupportedCaseError(LoudError, ValueError):
    """No asymptotic model is available for the requested parameter."""


class BracketError(LoudError, ValueError):
    """Endpoint signs of a bisection bracket agree."""

    def __init__(self, message, lo=None, hi=None, f_lo=None, f_hi=None):
        super().__init__(message)
        self.lo, self.hi, self.f_lo, self.f_hi = lo, hi, f_lo, f_hi


class NotIsochroneError(LoudError, ValueError):
    """The parameter is not one of the four quadratic isochrones."""


class IllConditionedError(LoudError, ValueError):
    """A least-squares design matrix is too ill-conditioned to trust."""

    def __init__(self, message, cond=None):
        super().__init__(message)
        self.cond = cond
