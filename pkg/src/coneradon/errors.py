"""Exception hierarchy.

Everything raised on bad input derives from :class:`ConeRadonError`, which the
CLI maps to exit code 1. :class:`NumericalError` is the one exception that maps
to exit code 2.
"""


class ConeRadonError(Exception):
    """Base class for all validation failures."""


class ShapeError(ConeRadonError, ValueError):
    """Array shapes or grids do not match."""


class DomainError(ConeRadonError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedDimensionError(ConeRadonError, ValueError):
    """Only d = 2 and d = 3 are implemented."""


class WeightError(ConeRadonError, ValueError):
    """Radial weight exponents ``p`` disagree between data and settings."""


class SupportError(ConeRadonError, ValueError):
    """A phantom's support leaves the region it must stay inside."""


class TruncationError(ConeRadonError, ValueError):
    """Ray quadrature does not reach past the phantom support."""


class LatticeError(ConeRadonError, ValueError):
    """A frequency is not on the discrete lattice of a grid."""


class ConfigError(ConeRadonError, ValueError):
    """Malformed or invalid configuration text."""

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class FormatError(ConeRadonError, ValueError):
    """Binary file header or payload is invalid."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class ChecksumError(FormatError):
    pass


class TruncatedFileError(FormatError):
    pass


class NumericalError(Exception):
    """NaN or Inf found in a computed output."""
