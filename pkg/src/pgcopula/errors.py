"""Exception types shared across the package."""

__all__ = [
    "DomainError",
    "NotPositiveDefiniteError",
    "NumericalError",
    "ValidationError",
]


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NotPositiveDefiniteError(ValueError):
    """A matrix required to be symmetric positive definite is not."""


class ValidationError(ValueError):
    """User-supplied configuration or data failed validation."""


class NumericalError(RuntimeError):
    """A computation produced a non-finite or otherwise unusable result."""
