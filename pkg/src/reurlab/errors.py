"""Exception types shared across the package.

Everything derives from ValueError so callers that do not care about the
fine-grained class can catch one thing. The service layer maps these to
HTTP 422 responses.
"""


class ValidationError(ValueError):
    """An object violates one of its structural invariants."""


class DimensionMismatchError(ValueError):
    """Operands live in different Hilbert-space dimensions."""


class GridMismatchError(ValueError):
    """Distributions or densities are defined over different supports."""


class InfeasibleError(ValueError):
    """A fitting problem has no solution inside the feasible region."""


class UnsupportedFamilyError(ValueError):
    """A model family does not support the requested operation."""
