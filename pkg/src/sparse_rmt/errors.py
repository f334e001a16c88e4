"""Exception hierarchy shared by all modules."""


class SparseRMTError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(SparseRMTError, ValueError):
    """Invalid sizes, parameters or mismatched dimensions."""


class DomainError(SparseRMTError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class NumericalError(SparseRMTError, ArithmeticError):
    """A numerical routine failed to deliver a certified result."""


class ConvergenceError(NumericalError):
    """An iterative method did not converge."""


class SingularPointError(NumericalError):
    """A resolvent was requested (numerically) at an eigenvalue."""


class NotAnOutlierError(NumericalError):
    """A secular root converged, but inside the unit disk."""

    def __init__(self, message, root):
        super().__init__(message)
        self.root = root


class DegenerateOutlierError(NumericalError):
    """Zero or several outliers where exactly one was required."""

    def __init__(self, message, count):
        super().__init__(message)
        self.count = count


class TruncationError(NumericalError):
    """A truncated power series is too short for the requested accuracy."""
