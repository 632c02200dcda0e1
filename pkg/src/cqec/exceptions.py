"""Exception hierarchy.

All errors derive from ``ValueError`` so callers that only care about bad
input can catch one type.
"""


class CQECError(ValueError):
    """Base class for package errors."""


class InvalidArgumentError(CQECError):
    """Shapes, dimensions or parameter values are inconsistent."""


class InvalidStateError(CQECError):
    """A matrix is not a valid density matrix within tolerance."""


class UnsupportedDimensionError(CQECError):
    """The requested dimension is outside what the method handles."""


class UndefinedBoundError(CQECError):
    """A bound needs coherence that the state does not have."""


class FitError(CQECError):
    """A regression cannot be computed from the given points."""


class ConfigError(CQECError):
    """An experiment configuration is invalid."""
