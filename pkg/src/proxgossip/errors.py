"""Exception taxonomy shared by the library and the command line.

The CLI maps these onto process exit codes: configuration problems exit
with 2, dataset problems with 3, and numerical breakdowns with 4.
"""

from __future__ import annotations

__all__ = ["InvalidArgumentError", "ConfigError", "DataError", "NumericError"]


class InvalidArgumentError(ValueError):
    """An argument violates an operation's precondition."""


class ConfigError(InvalidArgumentError):
    """A run configuration is incomplete or inconsistent."""


class DataError(Exception):
    """A dataset failed ingestion or validation."""


class NumericError(Exception):
    """A numerical routine broke down (singular system, non-finite values)."""
