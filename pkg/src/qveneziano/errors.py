"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`QVenezianoError`.  The CLI maps :class:`DomainError` to exit code 1
and :class:`PrecisionError` (which covers truncation and cost limits) to
exit code 2.
"""


class QVenezianoError(Exception):
    """Base class for library errors."""


class DomainError(QVenezianoError, ValueError):
    """An argument lies outside the region where the function is defined."""


class PoleError(DomainError):
    """A factor of a product vanishes, so the value is a pole or a zero."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class KinematicsError(DomainError):
    """Momenta violate the mass-shell or conservation condition."""

    def __init__(self, message, vector=None):
        super().__init__(message)
        self.vector = vector


class PrecisionError(QVenezianoError, ArithmeticError):
    """The requested precision could not be reached or certified."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class PrecisionLossError(PrecisionError):
    """Cancellation left no significant digits where some were required."""


class TruncationError(PrecisionError):
    """An infinite product or series did not settle within its term budget."""


class CostLimitError(PrecisionError):
    """An evaluation would exceed the configured number of product terms."""

    def __init__(self, message, cost=None, ceiling=None):
        super().__init__(message)
        self.cost = cost
        self.ceiling = ceiling
