import os
import subprocess
import sys

import numpy as np
import pytest

from fedsim._kernels import _pure

_speedups = pytest.importorskip(
    "fedsim._kernels._speedups", reason="compiled backend not built"
)

BACKENDS = [_pure, _speedups]


def _random_case(rng, n=6, d=16, samples=30):
    models = rng.standard_normal((n, d))
    weights = rng.standard_normal(n)
    x = rng.standard_normal((samples, d))
    y = x @ rng.standard_normal(d) + 0.05 * rng.standard_normal(samples)
    labels = (rng.random(samples) < 0.5).astype(np.float64)
    return models, weights, x, y, labels


def test_weighted_sum_bit_identical():
    rng = np.random.default_rng(21)
    for _ in range(200):
        n = int(rng.integers(1, 9))
        d = int(rng.integers(1, 40))
        models = rng.standard_normal((n, d)) * rng.uniform(1e-3, 1e3)
        weights = rng.standard_normal(n)
        a = _pure.weighted_sum(models, weights)
        b = _speedups.weighted_sum(models, weights)
        assert np.array_equal(a, b), "backends must agree to the last bit"


def test_cost_functions_agree_across_backends():
    rng = np.random.default_rng(22)
    for _ in range(50):
        _, _, x, y, labels = _random_case(rng)
        w = rng.standard_normal(x.shape[1])
        ls = [m.least_squares_cost(x, y, w) for m in BACKENDS]
        lg = [m.logistic_cost(x, labels, w) for m in BACKENDS]
        assert ls[0] == pytest.approx(ls[1], rel=1e-12, abs=1e-14)
        assert lg[0] == pytest.approx(lg[1], rel=1e-12, abs=1e-14)


def test_least_squares_cost_matches_formula():
    rng = np.random.default_rng(23)
    x = rng.standard_normal((40, 5))
    y = rng.standard_normal(40)
    w = rng.standard_normal(5)
    want = float(np.sum((x @ w - y) ** 2)) / (2 * 40)
    for mod in BACKENDS:
        assert mod.least_squares_cost(x, y, w) == pytest.approx(want, rel=1e-12)


def test_logistic_cost_matches_formula():
    rng = np.random.default_rng(24)
    x = rng.standard_normal((40, 5))
    y = (rng.random(40) < 0.5).astype(np.float64)
    w = rng.standard_normal(5)
    z = x @ w
    want = float(np.mean(np.logaddexp(0.0, z) - y * z))
    for mod in BACKENDS:
        assert mod.logistic_cost(x, y, w) == pytest.approx(want, rel=1e-12)


def test_logistic_cost_extreme_margins_stable():
    x = np.array([[60.0], [-60.0]])
    y = np.array([1.0, 0.0])
    w = np.array([10.0])
    for mod in BACKENDS:
        cost = mod.logistic_cost(x, y, w)
        assert np.isfinite(cost)
        assert cost == pytest.approx(0.0, abs=1e-12)


def test_train_least_squares_single_step_matches_formula():
    rng = np.random.default_rng(25)
    x = rng.standard_normal((30, 4))
    y = rng.standard_normal(30)
    w0 = rng.standard_normal(4)
    lr = 0.2
    grad = x.T @ (x @ w0 - y) / 30
    want = w0 - lr * grad
    for mod in BACKENDS:
        w1, cost = mod.train_least_squares(x, y, w0, lr, 1)
        assert np.max(np.abs(w1 - want)) < 1e-12
        assert cost == pytest.approx(mod.least_squares_cost(x, y, w1), rel=1e-12)


def test_train_logistic_single_step_matches_formula():
    rng = np.random.default_rng(26)
    x = rng.standard_normal((30, 4))
    y = (rng.random(30) < 0.5).astype(np.float64)
    w0 = rng.standard_normal(4)
    lr = 0.2
    p = 1.0 / (1.0 + np.exp(-(x @ w0)))
    want = w0 - lr * (x.T @ (p - y)) / 30
    for mod in BACKENDS:
        w1, _ = mod.train_logistic(x, y, w0, lr, 1)
        assert np.max(np.abs(w1 - want)) < 1e-12


def test_training_backends_agree_to_rounding():
    rng = np.random.default_rng(27)
    for _ in range(20):
        _, _, x, y, labels = _random_case(rng, d=6, samples=25)
        w0 = rng.standard_normal(6)
        wa, ca = _pure.train_least_squares(x, y, w0, 0.1, 25)
        wb, cb = _speedups.train_least_squares(x, y, w0, 0.1, 25)
        assert np.max(np.abs(wa - wb)) < 1e-9
        assert ca == pytest.approx(cb, rel=1e-9, abs=1e-12)
        wa, ca = _pure.train_logistic(x, labels, w0, 0.1, 25)
        wb, cb = _speedups.train_logistic(x, labels, w0, 0.1, 25)
        assert np.max(np.abs(wa - wb)) < 1e-9
        assert ca == pytest.approx(cb, rel=1e-9, abs=1e-12)


def test_zero_epochs_returns_start_point():
    rng = np.random.default_rng(28)
    x = rng.standard_normal((10, 3))
    y = rng.standard_normal(10)
    w0 = rng.standard_normal(3)
    for mod in BACKENDS:
        w1, cost = mod.train_least_squares(x, y, w0, 0.1, 0)
        assert np.array_equal(w1, w0)
        assert cost == pytest.approx(mod.least_squares_cost(x, y, w0), rel=1e-12)


def test_read_only_inputs_accepted():
    rng = np.random.default_rng(29)
    x = rng.standard_normal((10, 3))
    y = rng.standard_normal(10)
    w = rng.standard_normal(3)
    for arr in (x, y, w):
        arr.setflags(write=False)
    for mod in BACKENDS:
        assert np.isfinite(mod.least_squares_cost(x, y, w))
        mod.train_least_squares(x, y, w, 0.1, 1)


def test_env_var_forces_pure_backend():
    code = "import fedsim._kernels as k; print(k.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        env={"FEDSIM_PURE_PYTHON": "1", "PATH": "/usr/bin:/bin"},
    )
    assert out.stdout.strip() == "pure"


def test_default_backend_is_compiled_when_available():
    if os.environ.get("FEDSIM_PURE_PYTHON"):
        pytest.skip("pure backend forced via environment")
    from fedsim import _kernels

    assert _kernels.BACKEND == "compiled"
