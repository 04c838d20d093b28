"""Exception types shared across the package."""


class FockopError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(FockopError, ValueError):
    """Inputs have inconsistent or unsupported dimensions."""


class DomainError(FockopError, ValueError):
    """Input is outside the mathematical domain of the operation."""


class UnsupportedExponentsError(DomainError):
    """The (p, q) exponent range is outside what the method supports."""


class ProblemFileError(FockopError, ValueError):
    """A problem file is malformed or violates the interchange schema."""


class NumericalError(FockopError, RuntimeError):
    """A numerical routine failed to converge or lost accuracy."""


class TermBudgetError(FockopError, RuntimeError):
    """A symbolic expansion exceeded the configured term budget."""
