"""Seeded synthetic regression tasks and two small gradient-descent models.

These stand in for real datasets and deep networks: a linear softmax
classifier over label bins (the regression-as-classification model being
calibrated) and a linear least-squares regressor (the single-output baseline
it is compared against for RMSE).
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .binning import BinningScheme
from .errors import DivergedLoss, InvalidSpec, NonPositiveFactor


class Generator(str, enum.Enum):
    LINEAR = "Linear"
    NOISY_SINE = "NoisySine"


@dataclass(frozen=True)
class TaskSpec:
    seed: int = 0
    n_train: int = 20000
    n_val: int = 5000
    n_test: int = 5000
    feature_dim: int = 8
    noise_std: float = 1.0
    generator: Generator = Generator.LINEAR
    sine_scale: float = 2.0

    def __post_init__(self):
        for name in ("n_train", "n_val", "n_test", "feature_dim"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise InvalidSpec(f"{name} must be a positive integer, got {v!r}")
        if not (math.isfinite(self.noise_std) and self.noise_std >= 0):
            raise InvalidSpec(f"noise_std must be finite and non-negative, got {self.noise_std!r}")
        object.__setattr__(self, "generator", Generator(self.generator))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["generator"] = self.generator.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> TaskSpec:
        return cls(**d)


@dataclass(frozen=True, eq=False)
class SyntheticTask:
    spec: TaskSpec
    true_weights: np.ndarray
    true_bias: float
    x_train: np.ndarray
    y_train: np.ndarray
    x_val: np.ndarray
    y_val: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray

    def split(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        return getattr(self, f"x_{name}"), getattr(self, f"y_{name}")


def _signal(spec: TaskSpec, x, w, b):
    proj = x @ w
    if spec.generator is Generator.LINEAR:
        return proj + b
    return spec.sine_scale * np.sin(proj) + b


def generate_task(spec: TaskSpec) -> SyntheticTask:
    """Draw ``x ~ N(0, I)`` and ``y = f(x) + N(0, noise_std^2)``.

    ``f`` is ``w.x + b`` (Linear) or ``s * sin(w.x) + b`` (NoisySine), with
    ``w`` a seeded unit vector and ``b`` seeded. The three splits are
    consecutive slices of one draw, so they are disjoint.
    """
    rng = np.random.default_rng(spec.seed)
    d = spec.feature_dim
    w = rng.standard_normal(d)
    w /= np.linalg.norm(w)
    b = float(rng.uniform(-2.0, 2.0))
    n = spec.n_train + spec.n_val + spec.n_test
    x = rng.standard_normal((n, d))
    y = _signal(spec, x, w, b) + spec.noise_std * rng.standard_normal(n)
    a, c = spec.n_train, spec.n_train + spec.n_val
    return SyntheticTask(spec, w, b, x[:a], y[:a], x[a:c], y[a:c], x[c:], y[c:])


def distort_confidence(logits, factor: float) -> np.ndarray:
    """Scale logits by ``factor``; > 1 makes a model overconfident, < 1 underconfident."""
    if not (math.isfinite(factor) and factor > 0):
        raise NonPositiveFactor(f"distortion factor must be positive, got {factor!r}")
    return np.asarray(logits, dtype=float) * factor


@dataclass(eq=False)
class SoftmaxModel:
    weights: np.ndarray  # (d, M)
    bias: np.ndarray  # (M,)
    scheme: BinningScheme
    loss_history: list[float] = field(default_factory=list)

    def logits(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.weights + self.bias

    def to_dict(self) -> dict:
        return {
            "kind": "softmax",
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
            "scheme": self.scheme.to_dict(),
            "loss_history": [float(v) for v in self.loss_history],
        }

    @classmethod
    def from_dict(cls, d: dict) -> SoftmaxModel:
        return cls(
            np.array(d["weights"], dtype=float),
            np.array(d["bias"], dtype=float),
            BinningScheme.from_dict(d["scheme"]),
            list(d.get("loss_history", [])),
        )


@dataclass(eq=False)
class StandardRegressor:
    weights: np.ndarray  # (d,)
    bias: float
    loss_history: list[float] = field(default_factory=list)

    def predict(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.weights + self.bias

    def to_dict(self) -> dict:
        return {
            "kind": "standard",
            "weights": self.weights.tolist(),
            "bias": float(self.bias),
            "loss_history": [float(v) for v in self.loss_history],
        }

    @classmethod
    def from_dict(cls, d: dict) -> StandardRegressor:
        return cls(np.array(d["weights"], dtype=float), float(d["bias"]), list(d.get("loss_history", [])))


def cross_entropy_and_grad(weights, bias, x, t):
    """Mean cross-entropy of ``softmax(x W + b)`` against class indices ``t``.

    Returns ``(loss, dW, db)``.
    """
    n = x.shape[0]
    z = x @ weights + bias
    z = z - z.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(z).sum(axis=1))
    rows = np.arange(n)
    loss = float(np.mean(logsumexp - z[rows, t]))
    g = np.exp(z - logsumexp[:, None])
    g[rows, t] -= 1.0
    g /= n
    return loss, x.T @ g, g.sum(axis=0)


def squared_error_and_grad(weights, bias, x, y):
    """Mean squared error of ``x w + b``; returns ``(loss, dw, db)``."""
    r = x @ weights + bias - y
    n = x.shape[0]
    return float(np.mean(r * r)), (2.0 / n) * (x.T @ r), float(2.0 * r.mean())


def train_softmax(
    x,
    y,
    scheme: BinningScheme,
    epochs: int = 1500,
    learning_rate: float = 3.0,
    seed: int = 0,
    init_scale: float = 0.0,
) -> SoftmaxModel:
    """Full-batch gradient descent on mean cross-entropy over binned labels.

    Parameters start at zero unless ``init_scale > 0``, in which case the
    weights are drawn from ``N(0, init_scale^2)`` with ``seed``.
    ``loss_history`` holds the loss before each update followed by the final
    loss. With standardized features the softmax curvature is at most about
    0.5, so learning rates up to ~3.5 descend monotonically.
    """
    x = np.asarray(x, dtype=float)
    n, d = x.shape
    m = scheme.num_bins
    t = scheme.classify(y)
    xb = np.hstack([x, np.ones((n, 1))])
    rows = np.arange(n)
    # the one-hot part of the gradient never changes
    target_term = np.zeros((d + 1, m))
    np.add.at(target_term.T, t, xb)
    target_term /= n

    rng = np.random.default_rng(seed)
    params = np.zeros((d + 1, m))
    if init_scale > 0:
        params[:d] = init_scale * rng.standard_normal((d, m))

    def step(params):
        z = xb @ params
        zt = z[rows, t]
        zmax = z.max(axis=1)
        z -= zmax[:, None]
        np.exp(z, out=z)
        total = z.sum(axis=1)
        loss = float(np.mean(np.log(total) + zmax - zt))
        z /= total[:, None]
        return loss, (xb.T @ z) / n - target_term

    history = []
    for _ in range(epochs):
        loss, grad = step(params)
        if not math.isfinite(loss):
            raise DivergedLoss(f"cross-entropy became {loss} after {len(history)} epochs")
        history.append(loss)
        params -= learning_rate * grad
    loss, _ = step(params)
    if not math.isfinite(loss):
        raise DivergedLoss(f"cross-entropy became {loss} after {epochs} epochs")
    history.append(loss)
    return SoftmaxModel(params[:d].copy(), params[d].copy(), scheme, history)


def train_regressor(
    x,
    y,
    epochs: int = 500,
    learning_rate: float = 0.2,
    seed: int = 0,
    init_scale: float = 0.0,
) -> StandardRegressor:
    """Full-batch gradient descent on mean squared error."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    rng = np.random.default_rng(seed)
    w = init_scale * rng.standard_normal(x.shape[1]) if init_scale > 0 else np.zeros(x.shape[1])
    b = 0.0
    history = []
    for _ in range(epochs):
        loss, gw, gb = squared_error_and_grad(w, b, x, y)
        if not math.isfinite(loss):
            raise DivergedLoss(f"squared error became {loss} after {len(history)} epochs")
        history.append(loss)
        w -= learning_rate * gw
        b -= learning_rate * gb
    loss, _, _ = squared_error_and_grad(w, b, x, y)
    if not math.isfinite(loss):
        raise DivergedLoss(f"squared error became {loss} after {epochs} epochs")
    history.append(loss)
    return StandardRegressor(w, b, history)
