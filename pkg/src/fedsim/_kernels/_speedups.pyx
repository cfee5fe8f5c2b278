# cython: language_level=3
"""Compiled hot-loop kernels: weighted parameter sums and local training.

Semantics mirror fedsim._kernels._pure; weighted_sum is bit-identical to
the fallback (same accumulation order, no FP contraction), the training
kernels agree up to rounding.
"""

from libc.math cimport exp, fabs, log1p

import numpy as np


BACKEND = "compiled"


def weighted_sum(const double[:, ::1] models, const double[::1] weights):
    """Return sum_j weights[j] * models[j], accumulated in ascending j."""
    cdef Py_ssize_t n = models.shape[0]
    cdef Py_ssize_t d = models.shape[1]
    out_arr = np.zeros(d, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t j, k
    cdef double wj
    for j in range(n):
        wj = weights[j]
        for k in range(d):
            out[k] += wj * models[j, k]
    return out_arr


cdef double _ls_cost(const double[:, ::1] x, const double[::1] y, const double[::1] w) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    cdef Py_ssize_t i, k
    cdef double acc = 0.0, r
    for i in range(n):
        r = -y[i]
        for k in range(d):
            r += x[i, k] * w[k]
        acc += r * r
    return acc / (2.0 * n)


def least_squares_cost(const double[:, ::1] x, const double[::1] y, const double[::1] w):
    return _ls_cost(x, y, w)


def train_least_squares(const double[:, ::1] x, const double[::1] y, w0, double lr, int epochs):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    w_arr = np.array(w0, dtype=np.float64, copy=True)
    cdef double[::1] w = w_arr
    grad_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] grad = grad_arr
    cdef Py_ssize_t e, i, k
    cdef double r, scale = lr / n
    with nogil:
        for e in range(epochs):
            for k in range(d):
                grad[k] = 0.0
            for i in range(n):
                r = -y[i]
                for k in range(d):
                    r += x[i, k] * w[k]
                for k in range(d):
                    grad[k] += x[i, k] * r
            for k in range(d):
                w[k] -= scale * grad[k]
    return w_arr, _ls_cost(x, y, w)


cdef inline double _sigmoid(double z) noexcept nogil:
    cdef double ez
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    ez = exp(z)
    return ez / (1.0 + ez)


cdef double _logistic_cost(const double[:, ::1] x, const double[::1] y, const double[::1] w) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    cdef Py_ssize_t i, k
    cdef double acc = 0.0, z, softplus
    for i in range(n):
        z = 0.0
        for k in range(d):
            z += x[i, k] * w[k]
        softplus = (z if z > 0.0 else 0.0) + log1p(exp(-fabs(z)))
        acc += softplus - y[i] * z
    return acc / n


def logistic_cost(const double[:, ::1] x, const double[::1] y, const double[::1] w):
    return _logistic_cost(x, y, w)


def train_logistic(const double[:, ::1] x, const double[::1] y, w0, double lr, int epochs):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    w_arr = np.array(w0, dtype=np.float64, copy=True)
    cdef double[::1] w = w_arr
    grad_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] grad = grad_arr
    cdef Py_ssize_t e, i, k
    cdef double z, err, scale = lr / n
    with nogil:
        for e in range(epochs):
            for k in range(d):
                grad[k] = 0.0
            for i in range(n):
                z = 0.0
                for k in range(d):
                    z += x[i, k] * w[k]
                err = _sigmoid(z) - y[i]
                for k in range(d):
                    grad[k] += x[i, k] * err
            for k in range(d):
                w[k] -= scale * grad[k]
    return w_arr, _logistic_cost(x, y, w)
