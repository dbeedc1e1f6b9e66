"""Exception hierarchy shared by all modules.

The CLI maps :class:`ConfigurationError` to exit code 2 and
:class:`NumericalError` to exit code 3.
"""


class PeriwaveError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(PeriwaveError, ValueError):
    """Invalid parameters, shapes, or experiment configuration."""


class DomainError(PeriwaveError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InvariantError(PeriwaveError):
    """A structural invariant (e.g. Hermitian symmetry) does not hold."""


class NumericalError(PeriwaveError, ArithmeticError):
    """Quadrature or refinement did not converge within its budget.

    ``estimates`` holds the last two estimates produced before giving up.
    """

    def __init__(self, message, estimates=(None, None)):
        super().__init__(message)
        self.estimates = tuple(estimates)
