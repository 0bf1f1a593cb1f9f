"""Exception types shared across the package."""


class SpherotreeError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SpherotreeError, ValueError):
    """Malformed input data: bad addresses, incomplete codes, broken tables."""


class DomainError(SpherotreeError, ValueError):
    """Structurally valid input outside the domain of the requested operation."""


class InternalError(SpherotreeError, RuntimeError):
    """An internal invariant failed.  Always a bug, never a user error."""
