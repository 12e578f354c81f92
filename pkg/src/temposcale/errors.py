"""Exception types shared across the package."""


class TemposcaleError(Exception):
    """Base class for package-specific errors."""


class DataError(TemposcaleError):
    """Input files or trace rows cannot be used."""


class ZeroVarianceError(TemposcaleError):
    """A constant series was passed to an operation that needs spread."""


class SeriesTooShortError(TemposcaleError):
    """A series has too few points for the requested operation."""
