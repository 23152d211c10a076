"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage errors -> 2, numeric failures -> 3,
capability errors -> 4.
"""


class MedianQMCError(Exception):
    """Base class for all package errors."""


class UsageError(MedianQMCError):
    """Invalid arguments or configuration."""


class AccuracyError(MedianQMCError):
    """A numerical routine failed to reach its requested tolerance.

    Carries the last estimate and error bound so callers can decide whether
    the partial result is still usable.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class DomainError(MedianQMCError):
    """An input left the mathematical domain of an operation."""


class CapabilityError(MedianQMCError):
    """The request is outside what this implementation supports."""


class SpaceInvalidError(MedianQMCError):
    """The weight functions fail the integrability condition the space needs."""


class NumericalConsistencyError(MedianQMCError):
    """An internal consistency check failed beyond round-off tolerance."""
