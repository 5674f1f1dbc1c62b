"""Exception hierarchy shared by every module.

Numeric overflow is reported with the builtin :class:`OverflowError` so that
callers can catch it without importing this module.
"""


class RMTError(Exception):
    """Base class for all package errors."""


class PoleError(RMTError, ValueError):
    """Argument sits on a pole of a Gamma-type function."""


class ContourError(RMTError, ArithmeticError):
    """A Mellin-Barnes contour could not be placed or its tail does not decay."""


class UnsupportedParamsError(RMTError, ValueError):
    """Meijer-G index class or parameter set outside the supported whitelist."""


class NarainConditionError(RMTError, ValueError):
    """Parameter lists violate the balance condition of a Narain transform pair."""


class DomainError(RMTError, ValueError):
    """Argument outside the mathematical domain of the routine."""


class ConvergenceError(RMTError, ArithmeticError):
    """An iteration failed to converge within its budget."""


class EmptyBatchError(RMTError, ValueError):
    """Statistics requested for an empty sample batch."""


class UsageError(RMTError, ValueError):
    """Malformed user input at the command line or configuration level."""
