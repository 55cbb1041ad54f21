"""Evaluation metrics and per-cell reports."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .binning import BinningScheme
from .errors import EmptyInput, InconsistentLengths, LengthMismatch
from .intervals import IntervalSet, IntervalsLike, coverage, interval_width


class ReportMethod(str, enum.Enum):
    POSTERIOR = "Posterior"
    EMPIRICAL = "Empirical"
    TEMPERATURE = "Temperature"


def calibration_error(cov: float, alpha: float) -> float:
    """``|coverage - alpha|`` in percentage points."""
    return abs(cov - alpha) * 100.0


def mean_interval_width(intervals: IntervalsLike, scheme: BinningScheme) -> float:
    if isinstance(intervals, IntervalSet):
        widths = intervals.widths()
    else:
        widths = np.array([interval_width(iv, scheme) for iv in intervals], dtype=float)
    if widths.size == 0:
        raise EmptyInput("mean width of zero intervals")
    return math.fsum(widths) / widths.size


def rmse(predictions, labels) -> float:
    p = np.asarray(predictions, dtype=float).ravel()
    y = np.asarray(labels, dtype=float).ravel()
    if p.shape != y.shape:
        raise LengthMismatch(f"{p.size} predictions for {y.size} labels")
    if p.size == 0:
        raise EmptyInput("rmse of zero examples")
    return math.sqrt(math.fsum((p - y) ** 2) / p.size)


@dataclass(frozen=True)
class EvaluationReport:
    dataset_name: str
    confidence_level: float
    num_bins: int
    method: ReportMethod
    coverage: float
    calibration_error: float
    mean_width: float
    rmse: float
    n_examples: int
    parameter: Optional[float] = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = ReportMethod(self.method).value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> EvaluationReport:
        d = dict(d)
        d["method"] = ReportMethod(d["method"])
        return cls(**d)


def build_report(
    dataset_name: str,
    alpha: float,
    scheme: BinningScheme,
    method,
    intervals: IntervalsLike,
    labels,
    predictions,
    parameter: Optional[float] = None,
) -> EvaluationReport:
    """Assemble one (dataset, alpha, M, method) cell from test-split outputs.

    ``predictions`` are the point predictions used for RMSE. ``parameter`` is
    the fitted calibration parameter and must be None for the posterior cell.
    """
    method = ReportMethod(method)
    labels = np.asarray(labels, dtype=float).ravel()
    predictions = np.asarray(predictions, dtype=float).ravel()
    if not len(intervals) == labels.size == predictions.size:
        raise InconsistentLengths(
            f"{len(intervals)} intervals, {labels.size} labels, {predictions.size} predictions"
        )
    if method is ReportMethod.POSTERIOR and parameter is not None:
        raise ValueError("posterior cells carry no calibration parameter")
    cov = coverage(intervals, labels)
    return EvaluationReport(
        dataset_name=dataset_name,
        confidence_level=float(alpha),
        num_bins=scheme.num_bins,
        method=method,
        coverage=cov,
        calibration_error=calibration_error(cov, alpha),
        mean_width=mean_interval_width(intervals, scheme),
        rmse=rmse(predictions, labels),
        n_examples=int(labels.size),
        parameter=None if parameter is None else float(parameter),
    )


def format_table(reports: Sequence[EvaluationReport]) -> str:
    """Plain-text tables: calibration error, mean width and RMSE.

    Rows are (dataset, confidence, bins); columns are the methods present.
    Widths of infinite endpoints are clipped to the training label range.
    """
    methods = [m for m in ReportMethod if any(ReportMethod(r.method) is m for r in reports)]
    cells = {}
    for r in reports:
        cells[(r.dataset_name, r.confidence_level, r.num_bins, ReportMethod(r.method))] = r
    keys = sorted({k[:3] for k in cells})

    def block(title, metric, cols):
        head = ["Dataset", "Conf", "Bins"] + [m.value for m in cols]
        rows = []
        for ds, a, m in keys:
            row = [ds, f"{a * 100:g}%", str(m)]
            for meth in cols:
                r = cells.get((ds, a, m, meth))
                row.append("-" if r is None else f"{getattr(r, metric):.2f}")
            rows.append(row)
        widths = [max(len(h), *(len(r[j]) for r in rows)) for j, h in enumerate(head)]
        fmt = lambda r: "  ".join(s.ljust(w) if j < 3 else s.rjust(w) for j, (s, w) in enumerate(zip(r, widths)))
        lines = [title, fmt(head), "  ".join("-" * w for w in widths)]
        lines += [fmt(r) for r in rows]
        return "\n".join(lines)

    calibrated = [m for m in methods if m is not ReportMethod.POSTERIOR]
    out = [
        block("Calibration error [%]", "calibration_error", methods),
        block("Mean interval width (infinite ends clipped to training range)", "mean_width", calibrated),
        block("RMSE of point predictions", "rmse", methods),
    ]
    return "\n\n".join(out) + "\n"
