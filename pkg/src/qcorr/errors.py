"""Exception hierarchy.

Validation failures subclass :class:`ValueError` so generic callers can catch
them without importing this module. Each carries the violated ``margin`` when
one is meaningful.
"""

from __future__ import annotations


class QcorrError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(QcorrError, ValueError):
    def __init__(self, message: str, margin: float | None = None):
        super().__init__(message)
        self.margin = margin


class NotSquare(InvalidInput):
    pass


class NotHermitian(InvalidInput):
    pass


class DimensionMismatch(InvalidInput):
    pass


class NotUnitTrace(InvalidInput):
    pass


class NotPSD(InvalidInput):
    pass


class NotUnitary(InvalidInput):
    pass


class OutOfRange(InvalidInput):
    pass


class NotAProbabilityVector(InvalidInput):
    pass


class NotPure(InvalidInput):
    pass


class InvalidProjectors(InvalidInput):
    pass


class NotProjector(InvalidProjectors):
    pass


class NotCyclicOrthogonal(InvalidProjectors):
    pass


class BadSpectrum(InvalidInput):
    pass


class UnsupportedDims(InvalidInput):
    pass


class NotMonotone(QcorrError):
    """A property verdict changes more than once over a scanned range."""

    def __init__(self, message: str, changes: list[float] | None = None):
        super().__init__(message)
        self.changes = changes or []


class BudgetExhausted(QcorrError):
    """A unitary search finished without finding a property-breaking conjugation."""

    def __init__(self, message: str, best_margin: float, verdict=None):
        super().__init__(message)
        self.best_margin = best_margin
        self.verdict = verdict
