"""Pure-numpy reference kernels.

Fallback backend used when the compiled extension is unavailable or when
FEDSIM_PURE_PYTHON is set. The accumulation order of ``weighted_sum`` is
ascending row index, matching the compiled kernel bit for bit; the training
kernels use BLAS-backed matmuls and agree with the compiled loops only up
to rounding.
"""

import numpy as np

BACKEND = "pure"


def weighted_sum(models: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Return sum_j weights[j] * models[j], accumulated in ascending j."""
    out = np.zeros(models.shape[1], dtype=np.float64)
    for j in range(models.shape[0]):
        out += weights[j] * models[j]
    return out


def least_squares_cost(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> float:
    r = x @ w - y
    return float(r @ r) / (2.0 * x.shape[0])


def train_least_squares(
    x: np.ndarray, y: np.ndarray, w0: np.ndarray, lr: float, epochs: int
) -> tuple[np.ndarray, float]:
    """Full-batch gradient descent on the mean squared-error cost.

    Returns the updated weights and the cost evaluated after the last step.
    """
    n = x.shape[0]
    w = w0.copy()
    for _ in range(epochs):
        r = x @ w - y
        w -= (lr / n) * (x.T @ r)
    return w, least_squares_cost(x, y, w)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_cost(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> float:
    z = x @ w
    # mean of softplus(z) - y*z, with softplus computed overflow-free
    softplus = np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))
    return float(np.sum(softplus - y * z)) / x.shape[0]


def train_logistic(
    x: np.ndarray, y: np.ndarray, w0: np.ndarray, lr: float, epochs: int
) -> tuple[np.ndarray, float]:
    """Full-batch gradient descent on the mean cross-entropy cost."""
    n = x.shape[0]
    w = w0.copy()
    for _ in range(epochs):
        p = _sigmoid(x @ w)
        w -= (lr / n) * (x.T @ (p - y))
    return w, logistic_cost(x, y, w)
