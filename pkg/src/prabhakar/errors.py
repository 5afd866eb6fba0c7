"""Exception hierarchy shared by every module."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the admissible parameter domain."""


class ConvergenceError(ArithmeticError):
    """The series did not converge within the allowed number of terms."""

    def __init__(self, message: str, partial: complex, terms: int):
        super().__init__(message)
        self.partial = partial
        self.terms = terms


class PrecisionError(ArithmeticError):
    """Tolerance not met at the highest permitted working precision.

    ``value`` is the best estimate obtained and ``abs_error_bound`` an honest
    bound on its error.
    """

    def __init__(self, message: str, value: complex, abs_error_bound: float, precision_bits: int):
        super().__init__(message)
        self.value = value
        self.abs_error_bound = abs_error_bound
        self.precision_bits = precision_bits


class SamplerError(RuntimeError):
    """Inverse-transform sampling could not bracket a root."""


class TruncationError(RuntimeError):
    """A Fock-space state could not be truncated to the requested loss."""

    def __init__(self, message: str, achieved_loss: float, n_max: int):
        super().__init__(message)
        self.achieved_loss = achieved_loss
        self.n_max = n_max
