"""Exception hierarchy shared by the whole package.

The CLI maps these onto process exit codes: ConfigError -> 1,
DataError -> 2, NumericError -> 3.
"""


class VecboostError(Exception):
    """Base class for all errors raised by vecboost."""


class ConfigError(VecboostError):
    """Invalid configuration or usage (bad flag values, impossible settings)."""


class DataError(VecboostError):
    """Malformed or inconsistent input data (files, arrays, shapes)."""


class NumericError(VecboostError):
    """Numerical failure (singular solve, degenerate statistics)."""
