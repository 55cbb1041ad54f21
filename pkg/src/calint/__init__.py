"""Calibrated prediction intervals for regression-as-classification models."""

from .binning import BinningScheme, build_bins, label_to_class
from .calibrate import (
    CalibrationConfig,
    CalibrationResult,
    Method,
    apply_calibration,
    coverage_at_alpha0,
    coverage_at_temperature,
    empirical_calibration,
    temperature_scaling,
)
from .intervals import IntervalSet, PredictionInterval, coverage, interval_width, posterior_interval, posterior_intervals
from .metrics import EvaluationReport, build_report, calibration_error, mean_interval_width, rmse
from .probs import apply_temperature, expected_prediction, softmax_with_temperature

__version__ = "0.1.0"
