"""Exception hierarchy shared by all modules.

``ValidationError`` subclasses signal bad input (CLI exit status 1);
``NumericalError`` subclasses signal a computation that could not reach its
accuracy target (CLI exit status 2).
"""


class RelsoscError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(RelsoscError, ValueError):
    """Input outside the documented domain of an operation."""


class PoleError(ValidationError):
    """A gamma-function argument sits on a pole."""


class RegimeError(ValidationError):
    """Operation requested in a coupling regime where it is not defined."""


class NumericalError(RelsoscError, ArithmeticError):
    """A numerical procedure failed to meet its tolerance."""


class ConvergenceError(NumericalError):
    """A series, quadrature or integrator did not converge."""


class TruncationError(NumericalError):
    """A truncated expansion cannot satisfy its tail bound."""
