"""Post-hoc calibration of posterior prediction intervals.

Two one-parameter searches, both fitted on a validation split:

* empirical calibration searches the posterior mass level ``alpha0`` whose
  intervals cover a fraction ``alpha`` of validation labels;
* temperature scaling keeps the mass level at ``alpha`` and searches the
  softmax temperature ``T`` instead.

Empirical coverage is a step function of either parameter, so neither search
assumes it can hit ``alpha`` exactly. Every evaluated point goes into the
trace and the best one is returned, with ``converged`` saying whether the
tolerance was met.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .binning import BinningScheme
from .errors import BracketingFailed, EmptyValidationSet, SchemeMismatch
from .intervals import IntervalSet, coverage, posterior_intervals
from .probs import apply_temperature, expected_predictions

log = logging.getLogger(__name__)


class Method(str, enum.Enum):
    EMPIRICAL = "Empirical"
    TEMPERATURE = "Temperature"


@dataclass(frozen=True)
class CalibrationConfig:
    target_alpha: float
    epsilon: float = 0.001
    max_iterations: int = 50
    bracket_lo: float = 1.0 / 64
    bracket_hi: float = 64.0
    max_bracket_expansions: int = 20

    def __post_init__(self):
        if not 0.0 < self.target_alpha < 1.0:
            raise ValueError(f"target_alpha must lie in (0, 1), got {self.target_alpha}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not 0 < self.bracket_lo < self.bracket_hi:
            raise ValueError("need 0 < bracket_lo < bracket_hi")
        if self.max_bracket_expansions < 0:
            raise ValueError("max_bracket_expansions must be non-negative")


@dataclass
class CalibrationResult:
    method: Method
    parameter: float
    achieved_coverage: float
    converged: bool
    iterations: int
    trace: list[tuple[float, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = self.method.value
        d["trace"] = [[float(p), float(c)] for p, c in self.trace]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> CalibrationResult:
        return cls(
            method=Method(d["method"]),
            parameter=float(d["parameter"]),
            achieved_coverage=float(d["achieved_coverage"]),
            converged=bool(d["converged"]),
            iterations=int(d["iterations"]),
            trace=[(float(p), float(c)) for p, c in d["trace"]],
        )


def _best(trace, alpha):
    # smallest miss; ties go to the smaller parameter
    return min(trace, key=lambda pc: (abs(pc[1] - alpha), pc[0]))


def _check_inputs(matrix, labels, scheme):
    matrix = np.asarray(matrix, dtype=float)
    labels = np.asarray(labels, dtype=float).ravel()
    if matrix.ndim != 2 or matrix.shape[0] == 0 or labels.size == 0:
        raise EmptyValidationSet("validation set is empty")
    if matrix.shape[1] != scheme.num_bins:
        raise SchemeMismatch(f"{matrix.shape[1]} columns for a {scheme.num_bins}-bin scheme")
    if matrix.shape[0] != labels.size:
        raise SchemeMismatch(f"{matrix.shape[0]} rows for {labels.size} labels")
    return matrix, labels


def intervals_from_probs(probs, scheme: BinningScheme, alpha: float) -> IntervalSet:
    """Posterior ``alpha``-intervals around each row's expected prediction."""
    _, t_hat = expected_predictions(probs, scheme)
    return posterior_intervals(probs, t_hat, scheme, alpha)


def coverage_at_alpha0(probs, labels, scheme: BinningScheme, alpha0: float) -> float:
    return coverage(intervals_from_probs(probs, scheme, alpha0), labels)


def coverage_at_temperature(logits, labels, scheme: BinningScheme, alpha: float, T: float) -> float:
    """Coverage of posterior ``alpha``-intervals under ``softmax(z / T)``.

    Both the point prediction and the predicted bin are recomputed at ``T``.
    """
    probs = apply_temperature(logits, T)
    return coverage(intervals_from_probs(probs, scheme, alpha), labels)


def empirical_calibration(val_probs, val_labels, scheme: BinningScheme, config: CalibrationConfig) -> CalibrationResult:
    """Bisection on ``alpha0`` in ``[0, 1]`` for validation coverage ``alpha``."""
    probs, labels = _check_inputs(val_probs, val_labels, scheme)
    alpha, eps = config.target_alpha, config.epsilon
    _, t_hat = expected_predictions(probs, scheme)

    lo, hi = 0.0, 1.0
    trace = []
    converged = False
    for _ in range(config.max_iterations):
        mid = 0.5 * (lo + hi)
        cov = coverage(posterior_intervals(probs, t_hat, scheme, mid), labels)
        trace.append((mid, cov))
        if abs(cov - alpha) < eps:
            converged = True
            break
        if cov < alpha:
            lo = mid
        else:
            hi = mid
    param, cov = _best(trace, alpha)
    if not converged:
        log.warning("empirical calibration did not reach |coverage - %.3f| < %g; best %.5f", alpha, eps, cov)
    return CalibrationResult(Method.EMPIRICAL, param, cov, converged, len(trace), trace)


def temperature_scaling(val_logits, val_labels, scheme: BinningScheme, config: CalibrationConfig) -> CalibrationResult:
    """Bisection on ``log T`` for validation coverage ``alpha``.

    The initial bracket is widened geometrically until ``F(T_lo) <= alpha <=
    F(T_hi)``. ``iterations`` counts bisection steps only; the trace also
    holds the bracketing evaluations.
    """
    logits, labels = _check_inputs(val_logits, val_labels, scheme)
    alpha, eps = config.target_alpha, config.epsilon
    trace = []

    def f(T):
        cov = coverage_at_temperature(logits, labels, scheme, alpha, T)
        trace.append((T, cov))
        return cov

    t_lo, t_hi = config.bracket_lo, config.bracket_hi
    cov_lo, cov_hi = f(t_lo), f(t_hi)
    for _ in range(config.max_bracket_expansions):
        if cov_lo <= alpha:
            break
        t_lo /= 2
        cov_lo = f(t_lo)
    for _ in range(config.max_bracket_expansions):
        if cov_hi >= alpha:
            break
        t_hi *= 2
        cov_hi = f(t_hi)
    if not (cov_lo <= alpha <= cov_hi) and min(abs(cov_lo - alpha), abs(cov_hi - alpha)) >= eps:
        raise BracketingFailed(alpha, t_lo, cov_lo, t_hi, cov_hi)

    converged = min(abs(cov_lo - alpha), abs(cov_hi - alpha)) < eps
    steps = 0
    while not converged and steps < config.max_iterations:
        steps += 1
        mid = math.sqrt(t_lo * t_hi)
        cov = f(mid)
        if abs(cov - alpha) < eps:
            converged = True
        elif cov < alpha:
            t_lo = mid
        else:
            t_hi = mid
    param, cov = _best(trace, alpha)
    if not converged:
        log.warning("temperature scaling did not reach |coverage - %.3f| < %g; best %.5f", alpha, eps, cov)
    return CalibrationResult(Method.TEMPERATURE, param, cov, converged, steps, trace)


def apply_calibration(test_logits, scheme: BinningScheme, result: CalibrationResult, target_alpha: float) -> IntervalSet:
    """Intervals for new logits using a fitted calibration.

    Empirical results use mass level ``result.parameter`` at ``T = 1``;
    temperature results use mass level ``target_alpha`` at ``T = result.parameter``.
    """
    logits = np.asarray(test_logits, dtype=float)
    if logits.ndim != 2 or logits.shape[1] != scheme.num_bins:
        raise SchemeMismatch(f"logits of shape {logits.shape} for a {scheme.num_bins}-bin scheme")
    method = Method(result.method)
    if method is Method.EMPIRICAL:
        return intervals_from_probs(apply_temperature(logits, 1.0), scheme, result.parameter)
    return intervals_from_probs(apply_temperature(logits, result.parameter), scheme, target_alpha)
