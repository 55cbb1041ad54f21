"""Headerless CSV matrices and JSON sidecars.

Floats are written with 17 significant digits so they round-trip exactly and
reruns produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def write_matrix(path, values) -> None:
    a = np.asarray(values, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    np.savetxt(path, a, fmt="%.17g", delimiter=",")


def read_matrix(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)


def read_vector(path) -> np.ndarray:
    a = read_matrix(path)
    if a.shape[1] != 1:
        raise ValueError(f"{path}: expected one column, found {a.shape[1]}")
    return a[:, 0]


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def write_intervals(path, intervals) -> None:
    """One row per example: lower_idx, upper_idx, lower, upper, width."""
    widths = intervals.widths()
    with open(path, "w") as fh:
        for lo_i, hi_i, lo, hi, w in zip(
            intervals.lower_idx, intervals.upper_idx, intervals.lower, intervals.upper, widths
        ):
            fh.write(f"{int(lo_i)},{int(hi_i)},{float(lo)!r},{float(hi)!r},{float(w)!r}\n")
