"""Numeric kernel backend selection.

The compiled Cython extension is preferred when it has been built; the
pure-numpy fallback is used otherwise. Set FEDSIM_PURE_PYTHON=1 to force
the fallback (useful for debugging and for the `fedsim bench` baseline).
"""

import os

from fedsim._kernels import _pure

if os.environ.get("FEDSIM_PURE_PYTHON"):
    _impl = _pure
else:
    try:
        from fedsim._kernels import _speedups as _impl
    except ImportError:
        _impl = _pure

BACKEND: str = _impl.BACKEND

weighted_sum = _impl.weighted_sum
least_squares_cost = _impl.least_squares_cost
train_least_squares = _impl.train_least_squares
logistic_cost = _impl.logistic_cost
train_logistic = _impl.train_logistic
