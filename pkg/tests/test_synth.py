import math

import numpy as np
import pytest

from calint.binning import build_bins
from calint.calibrate import coverage_at_temperature
from calint.errors import DivergedLoss, InvalidSpec, NonPositiveFactor
from calint.metrics import rmse
from calint.probs import apply_temperature
from calint.synth import (
    Generator,
    TaskSpec,
    cross_entropy_and_grad,
    distort_confidence,
    generate_task,
    squared_error_and_grad,
    train_regressor,
    train_softmax,
)

SMALL = dict(n_train=600, n_val=200, n_test=200)


def central_diff(f, x, h=1e-6):
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        old = x[idx]
        x[idx] = old + h
        up = f()
        x[idx] = old - h
        down = f()
        x[idx] = old
        g[idx] = (up - down) / (2 * h)
    return g


def max_rel_err(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-8)))


class TestGenerateTask:
    def test_noise_free_linear(self):
        task = generate_task(TaskSpec(noise_std=0.0, **SMALL))
        for split in ("train", "val", "test"):
            x, y = task.split(split)
            np.testing.assert_array_equal(y, x @ task.true_weights + task.true_bias)

    def test_noise_free_sine(self):
        task = generate_task(TaskSpec(noise_std=0.0, generator=Generator.NOISY_SINE, **SMALL))
        np.testing.assert_array_equal(
            task.y_val, 2.0 * np.sin(task.x_val @ task.true_weights) + task.true_bias
        )

    def test_deterministic(self):
        a, b = generate_task(TaskSpec(seed=5, **SMALL)), generate_task(TaskSpec(seed=5, **SMALL))
        for name in ("x_train", "y_train", "x_val", "y_val", "x_test", "y_test"):
            assert getattr(a, name).tobytes() == getattr(b, name).tobytes()
        assert not np.array_equal(a.y_train, generate_task(TaskSpec(seed=6, **SMALL)).y_train)

    def test_shapes_and_disjoint_splits(self):
        task = generate_task(TaskSpec(feature_dim=3, **SMALL))
        assert task.x_train.shape == (600, 3) and task.x_val.shape == (200, 3) and task.y_test.shape == (200,)
        rows = np.vstack([task.x_train, task.x_val, task.x_test])
        assert len(np.unique(rows, axis=0)) == 1000

    def test_variance_grows_with_noise(self):
        for seed in range(10):
            lo = generate_task(TaskSpec(seed=seed, noise_std=0.5, **SMALL)).y_train.var()
            hi = generate_task(TaskSpec(seed=seed, noise_std=2.0, **SMALL)).y_train.var()
            assert hi > lo

    @pytest.mark.parametrize(
        "kw", [dict(n_train=0), dict(n_val=-1), dict(feature_dim=0), dict(noise_std=-0.1), dict(n_test=2.5)]
    )
    def test_invalid(self, kw):
        with pytest.raises(InvalidSpec):
            TaskSpec(**kw)

    def test_spec_round_trip(self):
        spec = TaskSpec(seed=3, noise_std=0.25, generator="NoisySine")
        assert TaskSpec.from_dict(spec.to_dict()) == spec


class TestDistort:
    z = np.random.default_rng(0).normal(scale=3, size=(100, 7))

    def test_identity(self):
        np.testing.assert_array_equal(distort_confidence(self.z, 1.0), self.z)

    @pytest.mark.parametrize("k", [0.33, 3.0, 10.0])
    def test_equals_inverse_temperature(self, k):
        np.testing.assert_allclose(
            apply_temperature(distort_confidence(self.z, k), 1.0), apply_temperature(self.z, 1 / k), rtol=0, atol=1e-12
        )

    @pytest.mark.parametrize("k", [0.0, -2.0, float("nan")])
    def test_bad_factor(self, k):
        with pytest.raises(NonPositiveFactor):
            distort_confidence(self.z, k)

    def test_overconfidence_lowers_coverage(self, linear_task, distorted_cells):
        cell = distorted_cells[30]
        honest = cell.model.logits(linear_task.x_test)
        y = linear_task.y_test
        before = coverage_at_temperature(honest, y, cell.scheme, 0.8, 1.0)
        after = coverage_at_temperature(distort_confidence(honest, 3.0), y, cell.scheme, 0.8, 1.0)
        assert before - after >= 0.05


class TestSoftmaxTrainer:
    def test_zero_epochs(self):
        task = generate_task(TaskSpec(**SMALL))
        s = build_bins(task.y_train, 12)
        model = train_softmax(task.x_train, task.y_train, s, epochs=0)
        assert np.all(model.weights == 0) and np.all(model.bias == 0)
        assert model.loss_history == [math.log(12)]

    def test_separable_two_bins(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(400, 2))
        side = np.where(x[:, 0] > 0, 1.0, -1.0)
        x[:, 0] += 0.5 * side
        y = side * (1 + rng.uniform(size=400))
        s = build_bins(y, 2)
        model = train_softmax(x, y, s, epochs=500)
        acc = np.mean(model.logits(x).argmax(1) == s.classify(y))
        assert acc == 1.0

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(5, 3))
        t = np.array([0, 2, 1, 3, 2])
        w, b = rng.normal(size=(3, 4)), rng.normal(size=4)
        _, gw, gb = cross_entropy_and_grad(w, b, x, t)
        loss = lambda: cross_entropy_and_grad(w, b, x, t)[0]
        assert max_rel_err(gw, central_diff(loss, w)) <= 1e-4
        assert max_rel_err(gb, central_diff(loss, b)) <= 1e-4

    def test_first_step_uses_reference_gradient(self):
        task = generate_task(TaskSpec(**SMALL))
        s = build_bins(task.y_train, 9)
        model = train_softmax(task.x_train, task.y_train, s, epochs=1, learning_rate=0.5)
        loss, gw, gb = cross_entropy_and_grad(np.zeros((8, 9)), np.zeros(9), task.x_train, s.classify(task.y_train))
        np.testing.assert_allclose(model.weights, -0.5 * gw, rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(model.bias, -0.5 * gb, rtol=1e-12, atol=1e-15)
        assert model.loss_history[0] == pytest.approx(loss, rel=1e-14)

    def test_loss_non_increasing_and_deterministic(self):
        task = generate_task(TaskSpec(**SMALL))
        s = build_bins(task.y_train, 20)
        a = train_softmax(task.x_train, task.y_train, s, epochs=300)
        b = train_softmax(task.x_train, task.y_train, s, epochs=300)
        assert np.all(np.diff(a.loss_history) <= 0)
        assert a.weights.tobytes() == b.weights.tobytes() and a.bias.tobytes() == b.bias.tobytes()

    def test_seeded_init(self):
        task = generate_task(TaskSpec(**SMALL))
        s = build_bins(task.y_train, 5)
        a = train_softmax(task.x_train, task.y_train, s, epochs=0, init_scale=0.1, seed=4)
        b = train_softmax(task.x_train, task.y_train, s, epochs=0, init_scale=0.1, seed=4)
        assert np.array_equal(a.weights, b.weights) and np.any(a.weights != 0)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergence(self):
        task = generate_task(TaskSpec(**SMALL))
        s = build_bins(task.y_train, 5)
        with pytest.raises(DivergedLoss):
            train_softmax(task.x_train, task.y_train, s, epochs=20, learning_rate=1e308)


class TestRegressor:
    def test_noise_free_recovers_target(self):
        task = generate_task(TaskSpec(noise_std=0.0, **SMALL))
        reg = train_regressor(task.x_train, task.y_train, epochs=500)
        assert rmse(reg.predict(task.x_test), task.y_test) <= 1e-3
        assert np.all(np.diff(reg.loss_history) <= 0)

    def test_zero_epochs(self):
        task = generate_task(TaskSpec(**SMALL))
        reg = train_regressor(task.x_train, task.y_train, epochs=0)
        assert np.all(reg.predict(task.x_test) == 0.0)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        x, y = rng.normal(size=(5, 3)), rng.normal(size=5)
        w = rng.normal(size=3)
        b = np.array([0.7])
        _, gw, gb = squared_error_and_grad(w, b[0], x, y)
        loss = lambda: squared_error_and_grad(w, b[0], x, y)[0]
        assert max_rel_err(gw, central_diff(loss, w)) <= 1e-4
        assert max_rel_err([gb], central_diff(loss, b)) <= 1e-4

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergence(self):
        task = generate_task(TaskSpec(**SMALL))
        with pytest.raises(DivergedLoss):
            train_regressor(task.x_train, task.y_train, epochs=3000, learning_rate=50.0)
