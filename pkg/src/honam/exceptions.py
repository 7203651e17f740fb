"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration and usage problems
exit 1, data-contract violations exit 2, numeric failures exit 3.
"""


class HonamError(Exception):
    """Base class for all package errors."""


class ShapeError(HonamError):
    """Array dimensions violate an operation's contract."""


class ConfigError(HonamError):
    """Invalid configuration, hyperparameter, or schema definition."""


class DataError(HonamError):
    """Input data violates the declared contract."""


class StateError(HonamError):
    """Object used in an order its lifecycle forbids."""


class NumericError(HonamError):
    """A numeric quantity became non-finite or otherwise unusable."""


class ModelFormatError(HonamError):
    """A saved model file is corrupt, truncated, or of an unknown version."""
