"""Exception hierarchy shared by every module.

Each class carries the process exit code the CLI returns when it escapes.
"""


class ForecastError(Exception):
    exit_code = 1


class UsageError(ForecastError):
    exit_code = 2


class DataError(ForecastError, ValueError):
    """Malformed or non-finite input data."""

    exit_code = 3


class DimensionError(ForecastError, ValueError):
    """Shapes or lengths that cannot satisfy a requested configuration."""

    exit_code = 4


class NumericalError(ForecastError, ArithmeticError):
    """Blow-up, overflow, or an out-of-domain numerical argument."""

    exit_code = 5


class ConfigError(ForecastError, ValueError):
    """Inconsistent model/series/config combinations."""

    exit_code = 6


class DomainError(NumericalError):
    """Argument outside the mathematical domain of an operation."""
