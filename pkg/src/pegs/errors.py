"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: SchemaError/DataError -> 2,
PrivacyError -> 3, BlocksFormatError and other I/O failures -> 4.
"""


class PegsError(Exception):
    """Base class for all package-specific errors."""


class SchemaError(PegsError):
    """Malformed schema definition or schema file."""


class DataError(PegsError):
    """Data does not conform to its schema (bad label, bad cell, shape mismatch)."""


class PrivacyError(PegsError):
    """Invalid or unsatisfiable privacy parameters (epsilon <= 0, l > C, ...)."""


class BlocksFormatError(PegsError):
    """Corrupt, truncated, or version-incompatible blocks artifact."""
