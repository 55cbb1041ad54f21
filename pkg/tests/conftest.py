import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest
from scipy.special import log_ndtr

from calint.binning import BinningScheme, build_bins

sys.path.insert(0, str(Path(__file__).parent))


@dataclass
class Problem:
    scheme: BinningScheme
    val_logits: np.ndarray
    val_labels: np.ndarray
    test_logits: np.ndarray
    test_labels: np.ndarray


def _log_bin_probs(mu, sigma, edges):
    # log P(a_k <= y < a_{k+1}) for y ~ N(mu, sigma^2), stable in both tails
    hi = (edges[None, 1:] - mu[:, None]) / sigma
    lo = (edges[None, :-1] - mu[:, None]) / sigma
    la, lb = log_ndtr(hi), log_ndtr(lo)
    with np.errstate(divide="ignore"):
        out = la + np.log1p(-np.exp(lb - la))
    # upper tail: use the mirrored form where the cdf saturates
    ua, ub = log_ndtr(-lo), log_ndtr(-hi)
    with np.errstate(divide="ignore"):
        upper = ua + np.log1p(-np.exp(ub - ua))
    return np.maximum(np.where(lo > 0, upper, out), -700.0)


def gaussian_problem(num_bins=30, factor=1.0, n_val=5000, n_test=5000, sigma=1.0, seed=0):
    """Exactly calibrated logits for y | mu ~ N(mu, sigma^2), then scaled by ``factor``."""
    rng = np.random.default_rng(seed)
    y_train = rng.normal(size=20000) + sigma * rng.normal(size=20000)
    scheme = build_bins(y_train, num_bins)

    def split(n):
        mu = rng.normal(size=n)
        y = mu + sigma * rng.normal(size=n)
        return factor * _log_bin_probs(mu, sigma, scheme.edges), y

    vz, vy = split(n_val)
    tz, ty = split(n_test)
    return Problem(scheme, vz, vy, tz, ty)


@pytest.fixture(scope="session")
def calibrated_problem():
    return gaussian_problem(30, 1.0)


@pytest.fixture(scope="session")
def overconfident_problem():
    return gaussian_problem(30, 3.0)


@pytest.fixture(scope="session")
def underconfident_problem():
    return gaussian_problem(30, 0.33)


@pytest.fixture(scope="session")
def linear_task():
    from calint.synth import TaskSpec, generate_task

    return generate_task(TaskSpec(seed=0))


@pytest.fixture(scope="session")
def distorted_cells(linear_task):
    """Classifiers with 10, 30 and 60 bins on the default Linear task, logits scaled by 3."""
    from calint.experiment import fit_cell

    return {m: fit_cell(linear_task, m, distort=3.0) for m in (10, 30, 60)}


@pytest.fixture(scope="session")
def standard_regressor(linear_task):
    from calint.synth import train_regressor

    return train_regressor(linear_task.x_train, linear_task.y_train)


def pytest_terminal_summary(terminalreporter):
    import verdicts

    if verdicts.LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(verdicts.LINES, key=lambda k: int(k[1:])):
            terminalreporter.write_line(verdicts.LINES[key])
