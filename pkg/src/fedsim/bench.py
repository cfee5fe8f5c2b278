"""Timing comparison between the compiled and pure-numpy kernels."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from fedsim._kernels import _pure

try:
    from fedsim._kernels import _speedups
except ImportError:
    _speedups = None


@dataclass(frozen=True)
class BenchResult:
    name: str
    pure_seconds: float
    compiled_seconds: float | None

    @property
    def speedup(self) -> float | None:
        if self.compiled_seconds is None or self.compiled_seconds == 0:
            return None
        return self.pure_seconds / self.compiled_seconds


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def run_benchmarks(
    n_models: int = 64,
    dim: int = 32,
    n_samples: int = 24,
    epochs: int = 400,
    repeats: int = 5,
    seed: int = 0,
) -> list[BenchResult]:
    """Time both backends on the simulator's typical working set.

    Defaults mimic the hot path of a run: many small client datasets
    trained for many gradient steps, where per-call overhead dominates
    and the compiled loops pay off. Large ``dim``/``n_samples`` shift
    the balance toward the numpy fallback's BLAS calls.
    """
    rng = np.random.default_rng(seed)
    models = rng.standard_normal((n_models, dim))
    weights = rng.random(n_models)
    weights /= weights.sum()
    x = rng.standard_normal((n_samples, dim))
    w_true = rng.standard_normal(dim)
    y_ls = x @ w_true + 0.1 * rng.standard_normal(n_samples)
    y_lg = (rng.random(n_samples) < 0.5).astype(np.float64)
    w0 = np.zeros(dim)
    lr = 0.05

    cases = [
        ("weighted_sum", lambda mod: mod.weighted_sum(models, weights)),
        (
            "train_least_squares",
            lambda mod: mod.train_least_squares(x, y_ls, w0, lr, epochs),
        ),
        (
            "train_logistic",
            lambda mod: mod.train_logistic(x, y_lg, w0, lr, epochs),
        ),
    ]
    results = []
    for name, call in cases:
        pure_t = _time(lambda: call(_pure), repeats)
        compiled_t = None
        if _speedups is not None:
            compiled_t = _time(lambda: call(_speedups), repeats)
        results.append(BenchResult(name, pure_t, compiled_t))
    return results


def format_results(results: list[BenchResult]) -> str:
    lines = [f"{'kernel':<22}{'pure (s)':>12}{'compiled (s)':>14}{'speedup':>10}"]
    for r in results:
        if r.compiled_seconds is None:
            lines.append(f"{r.name:<22}{r.pure_seconds:>12.4f}{'n/a':>14}{'n/a':>10}")
        else:
            lines.append(
                f"{r.name:<22}{r.pure_seconds:>12.4f}{r.compiled_seconds:>14.4f}"
                f"{r.speedup:>9.1f}x"
            )
    return "\n".join(lines)
