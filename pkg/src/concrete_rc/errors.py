"""Exception hierarchy shared by every stage of the pipeline.

Each family carries the process exit code the command line uses when the
error escapes to the top level.
"""


class ConcreteRCError(Exception):
    exit_code = 1


class ArgumentError(ConcreteRCError, ValueError):
    """Invalid call arguments or configuration values."""

    exit_code = 2


class ConfigurationError(ArgumentError):
    """Parameter set or manifest is inconsistent (e.g. unstable step size)."""


class DataError(ConcreteRCError, ValueError):
    """Input data cannot be used (malformed file, degenerate series)."""

    exit_code = 3


class DegenerateInputError(DataError):
    """Series without variation where variation is required."""


class ParseError(DataError):
    pass


class IncompleteError(DataError):
    """A ledger or feature vector lacks a quantity the caller needs."""


class NumericalError(ConcreteRCError, ArithmeticError):
    exit_code = 4


class InsufficientDataError(NumericalError):
    """Too few points or neighbour pairs for a stable estimate."""


class NotFoundError(NumericalError):
    """A searched-for feature (e.g. autocorrelation zero) does not occur."""


class UndefinedEntropyError(NumericalError):
    """Sample entropy has no template matches at length m."""
