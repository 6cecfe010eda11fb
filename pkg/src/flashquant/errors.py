"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, NumericalError -> 3,
ConstructionError -> 4.
"""


class FlashQuantError(Exception):
    """Base class for package errors."""


class ConfigError(FlashQuantError):
    """Bad or inconsistent configuration input."""


class NumericalError(FlashQuantError):
    """A numerical procedure had no solution or failed to converge."""


class ConstructionError(FlashQuantError):
    """Code construction could not satisfy its constraints."""
