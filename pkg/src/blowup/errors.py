"""Exception types shared across the package."""


class BlowupError(Exception):
    """Base class for all package errors."""


class DomainError(BlowupError, ValueError):
    """An argument lies outside the domain of a function or transform."""


class OutOfRangeError(BlowupError, ValueError):
    """A target value is not attained by the function being inverted.

    ``attained`` holds the (lo, hi) range that was actually reached.
    """

    def __init__(self, message, attained=None):
        super().__init__(message)
        self.attained = attained


class NonMonotoneError(BlowupError, ValueError):
    """A function declared monotone failed a three-point check."""


class NonConvergenceError(BlowupError, RuntimeError):
    """A quadrature, inversion or integration did not converge."""


class PreconditionError(BlowupError, ValueError):
    """A structural hypothesis (e.g. non-decreasing drift) does not hold."""


class InconsistencyError(BlowupError, RuntimeError):
    """Numerical evidence contradicts the analytic hypothesis in force."""
