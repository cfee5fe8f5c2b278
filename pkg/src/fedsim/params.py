"""Flat parameter vectors: weighted sums and binary checkpoints.

The checkpoint format is fixed: 4 magic bytes ``FPV1``, the dimension as
an unsigned 64-bit little-endian integer, then ``dim`` IEEE-754 binary64
values in little-endian order. No padding, no trailing bytes.
"""

from __future__ import annotations

import struct
from collections.abc import Sequence

import numpy as np

from fedsim import _kernels
from fedsim.errors import (
    DimensionMismatch,
    EmptyInput,
    FormatError,
    NonFiniteValue,
    NonFiniteWeight,
)

MAGIC = b"FPV1"


class ParameterVector:
    """Immutable 1-D float64 model parameter vector.

    Non-finite entries are rejected at construction so divergent local
    training fails fast instead of propagating NaNs into the aggregate.
    """

    __slots__ = ("_values",)

    def __init__(self, values: Sequence[float] | np.ndarray):
        arr = np.array(values, dtype=np.float64, copy=True).reshape(-1)
        if arr.size == 0:
            raise EmptyInput("parameter vector must have at least one element")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteValue("parameter vector contains NaN or infinity")
        arr.flags.writeable = False
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        """The underlying read-only float64 array."""
        return self._values

    @property
    def dim(self) -> int:
        return self._values.size

    def __len__(self) -> int:
        return self._values.size

    def __getitem__(self, index):
        return self._values[index]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParameterVector):
            return NotImplemented
        return self._values.shape == other._values.shape and bool(
            np.all(self._values == other._values)
        )

    def __hash__(self) -> int:
        return hash(self._values.tobytes())

    def __repr__(self) -> str:
        return f"ParameterVector(dim={self.dim})"

    def to_list(self) -> list[float]:
        return self._values.tolist()


def weighted_sum(
    models: Sequence[ParameterVector], weights: Sequence[float]
) -> ParameterVector:
    """Combine models into sum_j weights[j] * models[j].

    Accumulation runs in ascending client index so results are
    reproducible regardless of how the inputs were produced.
    """
    if len(models) == 0:
        raise EmptyInput("weighted_sum needs at least one model")
    if len(weights) != len(models):
        raise DimensionMismatch(
            f"{len(weights)} weights for {len(models)} models"
        )
    dim = models[0].dim
    for j, m in enumerate(models):
        if m.dim != dim:
            raise DimensionMismatch(
                f"model {j} has dim {m.dim}, expected {dim}"
            )
    w = np.asarray(weights, dtype=np.float64)
    if not np.all(np.isfinite(w)):
        raise NonFiniteWeight("weights contain NaN or infinity")
    stacked = np.stack([m.values for m in models])
    return ParameterVector(_kernels.weighted_sum(stacked, w))


def checkpoint_write(model: ParameterVector, path) -> None:
    """Write a parameter vector to ``path`` in the FPV1 binary format."""
    payload = model.values.astype("<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", model.dim))
        fh.write(payload)


def checkpoint_read(path) -> ParameterVector:
    """Read a parameter vector written by checkpoint_write.

    Raises FormatError on bad magic, truncation, trailing bytes, or a
    non-finite payload value.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise FormatError(f"bad magic bytes {data[:4]!r}, expected {MAGIC!r}")
    if len(data) < 12:
        raise FormatError("truncated header")
    (dim,) = struct.unpack("<Q", data[4:12])
    if dim == 0:
        raise FormatError("checkpoint declares dim 0")
    expected = 12 + 8 * dim
    if len(data) < expected:
        raise FormatError(f"truncated payload: {len(data)} bytes, expected {expected}")
    if len(data) > expected:
        raise FormatError(f"trailing bytes: {len(data)} bytes, expected {expected}")
    arr = np.frombuffer(data, dtype="<f8", count=dim, offset=12)
    if not np.all(np.isfinite(arr)):
        raise FormatError("checkpoint payload contains NaN or infinity")
    return ParameterVector(arr)
