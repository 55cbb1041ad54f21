"""End-to-end grid runs: train per bin count, calibrate per confidence level, report."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .binning import BinningScheme, build_bins
from .calibrate import (
    CalibrationConfig,
    CalibrationResult,
    Method,
    apply_calibration,
    empirical_calibration,
    intervals_from_probs,
    temperature_scaling,
)
from .metrics import EvaluationReport, ReportMethod, build_report
from .probs import apply_temperature, expected_predictions
from .synth import SoftmaxModel, SyntheticTask, distort_confidence, train_softmax


@dataclass
class Cell:
    """One trained classifier and its (possibly distorted) validation/test logits."""

    scheme: BinningScheme
    model: SoftmaxModel
    val_logits: np.ndarray
    test_logits: np.ndarray


@dataclass
class GridRun:
    reports: list[EvaluationReport] = field(default_factory=list)
    results: dict = field(default_factory=dict)  # (M, alpha, Method) -> CalibrationResult


def fit_cell(task: SyntheticTask, num_bins: int, distort: float = 1.0, **train_kw) -> Cell:
    scheme = build_bins(task.y_train, num_bins)
    model = train_softmax(task.x_train, task.y_train, scheme, **train_kw)
    val = distort_confidence(model.logits(task.x_val), distort)
    test = distort_confidence(model.logits(task.x_test), distort)
    return Cell(scheme, model, val, test)


def calibrate_cell(cell: Cell, y_val, alpha: float, **config_kw) -> dict:
    cfg = CalibrationConfig(alpha, **config_kw)
    return {
        Method.EMPIRICAL: empirical_calibration(apply_temperature(cell.val_logits, 1.0), y_val, cell.scheme, cfg),
        Method.TEMPERATURE: temperature_scaling(cell.val_logits, y_val, cell.scheme, cfg),
    }


def evaluate_cell(
    cell: Cell, y_test, alpha: float, results: dict, dataset_name: str = "synthetic"
) -> list[EvaluationReport]:
    """Posterior, Empirical and Temperature reports for one (M, alpha) cell."""
    probs = apply_temperature(cell.test_logits, 1.0)
    y_hat, _ = expected_predictions(probs, cell.scheme)
    reports = [
        build_report(
            dataset_name, alpha, cell.scheme, ReportMethod.POSTERIOR,
            intervals_from_probs(probs, cell.scheme, alpha), y_test, y_hat,
        )
    ]
    for method, res in results.items():
        ivs = apply_calibration(cell.test_logits, cell.scheme, res, alpha)
        if method is Method.TEMPERATURE:
            pred, _ = expected_predictions(apply_temperature(cell.test_logits, res.parameter), cell.scheme)
        else:
            pred = y_hat
        reports.append(
            build_report(dataset_name, alpha, cell.scheme, method.value, ivs, y_test, pred, parameter=res.parameter)
        )
    return reports


def run_grid(
    task: SyntheticTask,
    cells: dict,
    alphas=(0.66, 0.8, 0.9),
    dataset_name: str = "synthetic",
    **config_kw,
) -> GridRun:
    """Calibrate and evaluate every (M, alpha) pair for pre-fitted ``cells`` keyed by M."""
    run = GridRun()
    for m, cell in sorted(cells.items()):
        for alpha in alphas:
            results = calibrate_cell(cell, task.y_val, alpha, **config_kw)
            for method, res in results.items():
                run.results[(m, alpha, method)] = res
            run.reports += evaluate_cell(cell, task.y_test, alpha, results, dataset_name)
    return run
