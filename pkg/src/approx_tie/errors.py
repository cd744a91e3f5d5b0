"""Exception types shared across the package."""


class ApproxTieError(Exception):
    """Base class for all package errors."""


class ValidationError(ApproxTieError, ValueError):
    """Malformed input: bad schema, negative weights, broken invariants."""


class DomainError(ValidationError):
    """An argument lies outside the domain of an operation (e.g. index out of range)."""


class BudgetError(ApproxTieError):
    """An exhaustive computation was refused because it exceeds its size budget."""


class ConsistencyError(ApproxTieError):
    """An internal cross-check failed; indicates a bug rather than bad input."""
