"""Exception types raised across the package.

All of them derive from :class:`CalintError`, and also from ``ValueError``
where the failure is about a bad argument, so callers can catch either.
"""


class CalintError(Exception):
    """Base class for all package errors."""


class EmptyTrainingSet(CalintError, ValueError):
    pass


class DegenerateLabels(CalintError, ValueError):
    pass


class NonPositiveBinCount(CalintError, ValueError):
    pass


class InvalidLabel(CalintError, ValueError):
    pass


class NonPositiveTemperature(CalintError, ValueError):
    pass


class NonFiniteLogit(CalintError, ValueError):
    pass


class LengthMismatch(CalintError, ValueError):
    pass


class EmptyInput(CalintError, ValueError):
    pass


class AlphaOutOfRange(CalintError, ValueError):
    pass


class EmptyValidationSet(CalintError, ValueError):
    pass


class SchemeMismatch(CalintError, ValueError):
    pass


class InconsistentLengths(CalintError, ValueError):
    pass


class InvalidSpec(CalintError, ValueError):
    pass


class NonPositiveFactor(CalintError, ValueError):
    pass


class DivergedLoss(CalintError, ArithmeticError):
    pass


class BracketingFailed(CalintError):
    """The target coverage is not reachable inside the expanded T bracket."""

    def __init__(self, alpha, t_lo, cov_lo, t_hi, cov_hi):
        self.alpha = alpha
        self.t_lo, self.cov_lo = t_lo, cov_lo
        self.t_hi, self.cov_hi = t_hi, cov_hi
        super().__init__(
            f"cannot bracket coverage {alpha:.4f}: "
            f"F(T={t_lo:.6g})={cov_lo:.4f}, F(T={t_hi:.6g})={cov_hi:.4f}"
        )
