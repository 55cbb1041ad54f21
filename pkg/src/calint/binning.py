"""Discretization of a real-valued label space into M ordered classes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLabels, EmptyTrainingSet, InvalidLabel, NonPositiveBinCount


@dataclass(frozen=True, eq=False)
class BinningScheme:
    """Bin edges ``a_0 < ... < a_M`` (outer two infinite) and per-bin centers.

    ``finite_lo``/``finite_hi`` are the min and max training label; they are
    used to give infinite interval endpoints a finite width.
    """

    num_bins: int
    edges: np.ndarray
    centers: np.ndarray
    finite_lo: float
    finite_hi: float

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        centers = np.asarray(self.centers, dtype=float)
        if edges.shape != (self.num_bins + 1,) or centers.shape != (self.num_bins,):
            raise ValueError("edges must have M+1 entries and centers M entries")
        if not (edges[0] == -np.inf and edges[-1] == np.inf):
            raise ValueError("outer edges must be -inf and +inf")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be strictly increasing")
        if not self.finite_lo <= self.finite_hi:
            raise ValueError("finite_lo must not exceed finite_hi")
        edges.flags.writeable = False
        centers.flags.writeable = False
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "centers", centers)

    @property
    def interior_edges(self) -> np.ndarray:
        return self.edges[1:-1]

    def classify(self, y) -> np.ndarray:
        """Vectorized :func:`label_to_class`."""
        y = np.asarray(y, dtype=float)
        if np.isnan(y).any():
            raise InvalidLabel("NaN label")
        # side="right" puts y == a_t into bin t (left-closed bins)
        return np.searchsorted(self.interior_edges, y, side="right")

    def __eq__(self, other):
        if not isinstance(other, BinningScheme):
            return NotImplemented
        return (
            self.num_bins == other.num_bins
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.centers, other.centers)
            and self.finite_lo == other.finite_lo
            and self.finite_hi == other.finite_hi
        )

    def to_dict(self) -> dict:
        def enc(a):
            if a == -np.inf:
                return "-inf"
            if a == np.inf:
                return "+inf"
            return float(a)

        return {
            "num_bins": self.num_bins,
            "edges": [enc(a) for a in self.edges],
            "centers": [float(c) for c in self.centers],
            "finite_lo": float(self.finite_lo),
            "finite_hi": float(self.finite_hi),
        }

    @classmethod
    def from_dict(cls, d: dict) -> BinningScheme:
        def dec(a):
            if a == "-inf":
                return -np.inf
            if a == "+inf":
                return np.inf
            return float(a)

        return cls(
            num_bins=int(d["num_bins"]),
            edges=np.array([dec(a) for a in d["edges"]]),
            centers=np.array(d["centers"], dtype=float),
            finite_lo=float(d["finite_lo"]),
            finite_hi=float(d["finite_hi"]),
        )


def build_bins(train_labels, num_bins: int) -> BinningScheme:
    """Equally spaced bins between the min and max training label.

    Interior edges come from ``linspace(min, max, M + 1)``; the outermost two
    are then replaced with -inf/+inf. Each center is the mean of the training
    labels in its bin. An empty interior bin falls back to the midpoint of its
    finite edges; empty outer bins fall back to ``finite_lo``/``finite_hi``.
    """
    if isinstance(num_bins, bool) or int(num_bins) != num_bins or num_bins < 1:
        raise NonPositiveBinCount(f"num_bins must be a positive integer, got {num_bins!r}")
    num_bins = int(num_bins)
    y = np.asarray(train_labels, dtype=float).ravel()
    if y.size == 0:
        raise EmptyTrainingSet("no training labels")
    if not np.isfinite(y).all():
        raise InvalidLabel("training labels must be finite")
    lo, hi = float(y.min()), float(y.max())
    if num_bins >= 2 and lo == hi:
        raise DegenerateLabels(f"all {y.size} labels equal {lo}; cannot place {num_bins} bins")

    finite_edges = np.linspace(lo, hi, num_bins + 1)
    edges = finite_edges.copy()
    edges[0], edges[-1] = -np.inf, np.inf

    cls = np.searchsorted(edges[1:-1], y, side="right")
    counts = np.bincount(cls, minlength=num_bins)
    sums = np.bincount(cls, weights=y, minlength=num_bins)
    centers = np.empty(num_bins)
    for i in range(num_bins):
        if counts[i]:
            centers[i] = sums[i] / counts[i]
        elif i == 0:
            centers[i] = lo
        elif i == num_bins - 1:
            centers[i] = hi
        else:
            centers[i] = 0.5 * (finite_edges[i] + finite_edges[i + 1])
    # a bin mean can round just past its edge when all its labels sit on it
    centers = np.clip(centers, edges[:-1], np.nextafter(edges[1:], -np.inf))
    return BinningScheme(num_bins, edges, centers, lo, hi)


def label_to_class(scheme: BinningScheme, y: float) -> int:
    """Index ``t`` with ``a_t <= y < a_{t+1}``."""
    if math.isnan(y):
        raise InvalidLabel("NaN label")
    return int(scheme.classify(y))
