"""Smallest symmetric posterior prediction intervals and their coverage.

An interval is grown outward from the predicted bin one bin per side at a
time until it holds at least ``alpha`` of the posterior mass. Endpoints are
always bin edges. Near the ends of the label range the summation window is
clamped to ``[0, M - 1]``.

For ``alpha < 1`` mass is compared against ``alpha - MASS_TOL`` so that float
rounding in the running sum cannot decide the radius; a row whose total
still falls short gets the full range. ``alpha == 1`` asks for all of the
mass, so the window is the smallest one spanning every bin with nonzero
probability (the full range for any softmax row without underflow).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

from .binning import BinningScheme
from .errors import AlphaOutOfRange, EmptyInput, LengthMismatch

MASS_TOL = 1e-12


@dataclass(frozen=True)
class PredictionInterval:
    lower: float
    upper: float
    lower_idx: int
    upper_idx: int


@dataclass(frozen=True, eq=False)
class IntervalSet:
    """A batch of intervals stored as edge-index arrays into ``scheme.edges``."""

    lower_idx: np.ndarray
    upper_idx: np.ndarray
    scheme: BinningScheme

    @property
    def lower(self) -> np.ndarray:
        return self.scheme.edges[self.lower_idx]

    @property
    def upper(self) -> np.ndarray:
        return self.scheme.edges[self.upper_idx]

    def __len__(self) -> int:
        return len(self.lower_idx)

    def __getitem__(self, k: int) -> PredictionInterval:
        lo, hi = int(self.lower_idx[k]), int(self.upper_idx[k])
        e = self.scheme.edges
        return PredictionInterval(float(e[lo]), float(e[hi]), lo, hi)

    def __iter__(self) -> Iterator[PredictionInterval]:
        return (self[k] for k in range(len(self)))

    def widths(self) -> np.ndarray:
        lo = np.where(np.isinf(self.lower), self.scheme.finite_lo, self.lower)
        hi = np.where(np.isinf(self.upper), self.scheme.finite_hi, self.upper)
        return np.maximum(hi - lo, 0.0)


def _check_alpha(alpha):
    if not (0.0 < alpha <= 1.0):
        raise AlphaOutOfRange(f"alpha must lie in (0, 1], got {alpha!r}")


def _support_radius(p, t):
    nz = np.flatnonzero(p > 0)
    if nz.size == 0:
        return max(t, p.size - 1 - t)
    return max(t - nz[0], nz[-1] - t, 0)


def posterior_interval(probs_row, t_hat: int, scheme: BinningScheme, alpha: float) -> PredictionInterval:
    """Smallest symmetric interval around bin ``t_hat`` with mass >= ``alpha``."""
    _check_alpha(alpha)
    p = np.asarray(probs_row, dtype=float)
    m = scheme.num_bins
    if p.shape != (m,):
        raise LengthMismatch(f"{p.size} probabilities for {m} bins")
    if not 0 <= t_hat < m:
        raise ValueError(f"t_hat={t_hat} outside [0, {m - 1}]")
    if alpha >= 1.0:
        i = _support_radius(p, t_hat)
    else:
        need = alpha - MASS_TOL
        i = 0
        mass = p[t_hat]
        while mass < need and (t_hat - i > 0 or t_hat + i < m - 1):
            i += 1
            if t_hat - i >= 0:
                mass += p[t_hat - i]
            if t_hat + i <= m - 1:
                mass += p[t_hat + i]
    lo, hi = max(0, t_hat - i), min(m, t_hat + 1 + i)
    return PredictionInterval(float(scheme.edges[lo]), float(scheme.edges[hi]), lo, hi)


def posterior_intervals(probs, t_hat, scheme: BinningScheme, alpha: float) -> IntervalSet:
    """Row-wise :func:`posterior_interval`, with identical float accumulation order."""
    _check_alpha(alpha)
    p = np.asarray(probs, dtype=float)
    t = np.asarray(t_hat, dtype=np.intp)
    n, m = p.shape
    if m != scheme.num_bins or t.shape != (n,):
        raise LengthMismatch(f"probs {p.shape}, t_hat {t.shape}, scheme {scheme.num_bins} bins")
    if alpha >= 1.0:
        radius = np.array([_support_radius(p[k], t[k]) for k in range(n)], dtype=np.intp)
        return IntervalSet(np.maximum(0, t - radius), np.minimum(m, t + 1 + radius), scheme)
    need = alpha - MASS_TOL
    rows = np.arange(n)
    mass = p[rows, t]
    radius = np.zeros(n, dtype=np.intp)
    # rows still growing: short of alpha and not yet spanning every bin
    active = (mass < need) & ((t > 0) | (t < m - 1))
    i = 0
    while active.any():
        i += 1
        idx = rows[active]
        ti = t[idx]
        left, right = ti - i, ti + i
        acc = mass[idx]
        acc = acc + np.where(left >= 0, p[idx, np.maximum(left, 0)], 0.0)
        acc = acc + np.where(right <= m - 1, p[idx, np.minimum(right, m - 1)], 0.0)
        mass[idx] = acc
        radius[idx] = i
        active[idx] = (acc < need) & ((left > 0) | (right < m - 1))
    lower = np.maximum(0, t - radius)
    upper = np.minimum(m, t + 1 + radius)
    return IntervalSet(lower, upper, scheme)


IntervalsLike = Union[IntervalSet, Sequence[PredictionInterval]]


def _bounds(intervals: IntervalsLike) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(intervals, IntervalSet):
        return intervals.lower, intervals.upper
    lower = np.array([iv.lower for iv in intervals], dtype=float)
    upper = np.array([iv.upper for iv in intervals], dtype=float)
    return lower, upper


def covered(intervals: IntervalsLike, labels) -> np.ndarray:
    """Per-example indicator ``u < y < v``."""
    lower, upper = _bounds(intervals)
    y = np.asarray(labels, dtype=float).ravel()
    if y.shape != lower.shape:
        raise LengthMismatch(f"{lower.size} intervals for {y.size} labels")
    return (lower < y) & (y < upper)


def coverage(intervals: IntervalsLike, labels) -> float:
    """Fraction of labels strictly inside their interval."""
    hits = covered(intervals, labels)
    if hits.size == 0:
        raise EmptyInput("coverage of zero examples")
    return int(np.count_nonzero(hits)) / hits.size


def interval_width(interval: PredictionInterval, scheme: BinningScheme) -> float:
    """``v - u`` with infinite endpoints clipped to the training label range."""
    lo = scheme.finite_lo if math.isinf(interval.lower) else interval.lower
    hi = scheme.finite_hi if math.isinf(interval.upper) else interval.upper
    return max(hi - lo, 0.0)
