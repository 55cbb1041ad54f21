"""Temperature-scaled softmax and expected point predictions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .binning import BinningScheme
from .errors import LengthMismatch, NonFiniteLogit, NonPositiveTemperature


@dataclass(frozen=True)
class PointPrediction:
    y_hat: float
    t_hat: int


def _check_temperature(T):
    if not (np.isfinite(T) and T > 0):
        raise NonPositiveTemperature(f"temperature must be positive and finite, got {T!r}")


def apply_temperature(logits, T: float = 1.0) -> np.ndarray:
    """Row-wise ``softmax(z / T)`` for an ``(N, M)`` logit matrix.

    The row max is subtracted before dividing by ``T``, so the result is
    stable for large logits and tiny temperatures.
    """
    _check_temperature(T)
    z = np.asarray(logits, dtype=float)
    if z.ndim != 2:
        raise ValueError(f"expected a 2-d logit matrix, got shape {z.shape}")
    if not np.isfinite(z).all():
        raise NonFiniteLogit("logits must be finite")
    s = (z - z.max(axis=1, keepdims=True)) / T
    e = np.exp(s)
    return e / e.sum(axis=1, keepdims=True)


def softmax_with_temperature(logits_row, T: float = 1.0) -> np.ndarray:
    row = np.asarray(logits_row, dtype=float)
    if row.ndim != 1:
        raise ValueError("expected a single row of logits")
    return apply_temperature(row[None, :], T)[0]


def expected_predictions(probs, scheme: BinningScheme) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`expected_prediction`; returns ``(y_hat, t_hat)`` arrays."""
    p = np.asarray(probs, dtype=float)
    if p.ndim != 2 or p.shape[1] != scheme.num_bins:
        raise LengthMismatch(
            f"probability matrix has shape {p.shape}, scheme has {scheme.num_bins} bins"
        )
    y_hat = p @ scheme.centers
    return y_hat, scheme.classify(y_hat)


def expected_prediction(probs_row, scheme: BinningScheme) -> PointPrediction:
    """Probability-weighted mean of the bin centers, plus the bin holding it."""
    row = np.asarray(probs_row, dtype=float)
    if row.shape != (scheme.num_bins,):
        raise LengthMismatch(f"{row.size} probabilities for {scheme.num_bins} bins")
    y_hat, t_hat = expected_predictions(row[None, :], scheme)
    return PointPrediction(float(y_hat[0]), int(t_hat[0]))
