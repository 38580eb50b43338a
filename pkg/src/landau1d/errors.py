"""Exception types raised by the numerical routines."""

from __future__ import annotations


class Landau1DError(Exception):
    """Base class for all package errors."""


class InvalidInputError(Landau1DError, ValueError):
    pass


class AccuracyError(Landau1DError):
    """A quadrature or eigensolver did not reach the requested tolerance."""

    def __init__(self, message: str, best_estimate: float, error_bound: float):
        super().__init__(f"{message} (best={best_estimate!r}, err~{error_bound:.3g})")
        self.best_estimate = best_estimate
        self.error_bound = error_bound


class DomainTooSmallError(Landau1DError):
    def __init__(self, message: str, suggested_L: float):
        super().__init__(f"{message}; try L >= {suggested_L:.6g}")
        self.suggested_L = suggested_L


class ConvergenceError(Landau1DError):
    def __init__(self, message: str, history: list[float] | None = None):
        super().__init__(message)
        self.history = list(history or [])


class SizeError(Landau1DError):
    pass


class EnvelopeError(Landau1DError):
    """A declared model envelope is violated on the validation grid."""

    def __init__(self, message: str, worst_x: float, violation: float):
        super().__init__(f"{message} (worst x={worst_x:.6g}, violation={violation:.3g})")
        self.worst_x = worst_x
        self.violation = violation


class NearSingularError(Landau1DError):
    pass


class SamplingError(Landau1DError):
    pass
