class GlobalCAError(Exception):
    """Base class for errors raised by this package."""


class DomainError(GlobalCAError, ValueError):
    """An argument lies outside the domain of an operation."""


class ConflictError(GlobalCAError):
    """Both constituent rules claim the all-zero neighbourhood with different colours."""


class ExhaustedError(GlobalCAError):
    """An enumeration was asked for more items than exist."""


class CalibrationError(GlobalCAError):
    """Threshold training could not separate the labelled classes."""


class DataError(GlobalCAError):
    """Input data (labels, shards, records) is malformed or incomplete."""
