"""Exception types shared across the package."""


class KppError(Exception):
    """Base class for all computational errors raised by kppfront."""


class AdmissibilityError(KppError):
    """Parameters outside the admissible range (e.g. speed below the minimal c = 2)."""


class DomainError(KppError):
    """Argument outside the mathematical domain of an operation."""


class GridError(KppError):
    """Grid does not satisfy a structural requirement (coverage, spacing, lag alignment)."""


class TailError(KppError):
    """Missing or unusable tail declaration on a profile."""


class ConvergenceError(KppError):
    """An iteration failed to converge within its budget.

    Carries the residual history so callers can report what happened.
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class ConeError(KppError):
    """A profile left the invariant order interval (lower/upper solution bracket)."""


class BracketError(KppError):
    """A bisection bracket does not straddle a sign change."""


class RootSearchError(KppError):
    """A root was not found where the search box analysis says it must be."""


class FitError(KppError):
    """Not enough usable samples for a tail or speed fit."""
