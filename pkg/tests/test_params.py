import struct

import numpy as np
import pytest

from fedsim.errors import (
    DimensionMismatch,
    EmptyInput,
    FormatError,
    NonFiniteValue,
    NonFiniteWeight,
)
from fedsim.params import MAGIC, ParameterVector, checkpoint_read, checkpoint_write, weighted_sum


def test_construction_basic():
    v = ParameterVector([1.5, -2.0, 0.0])
    assert v.dim == 3
    assert len(v) == 3
    assert v.values.dtype == np.float64
    assert v[1] == -2.0
    assert v.to_list() == [1.5, -2.0, 0.0]


def test_construction_copies_and_freezes():
    src = np.array([1.0, 2.0])
    v = ParameterVector(src)
    src[0] = 99.0
    assert v[0] == 1.0
    with pytest.raises(ValueError):
        v.values[0] = 5.0


def test_construction_flattens_and_casts():
    v = ParameterVector(np.array([[1, 2], [3, 4]], dtype=np.int32))
    assert v.dim == 4
    assert v.values.dtype == np.float64


def test_empty_rejected():
    with pytest.raises(EmptyInput):
        ParameterVector([])
    with pytest.raises(EmptyInput):
        ParameterVector(np.empty(0))


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
def test_non_finite_rejected(bad):
    with pytest.raises(NonFiniteValue):
        ParameterVector([1.0, bad])


def test_equality_and_hash():
    a = ParameterVector([1.0, 2.0])
    b = ParameterVector([1.0, 2.0])
    c = ParameterVector([1.0, 2.5])
    assert a == b
    assert a != c
    assert hash(a) == hash(b)


def test_weighted_sum_symmetric_average():
    out = weighted_sum(
        [ParameterVector([0.0, 0.0]), ParameterVector([1.0, 1.0])], [0.5, 0.5]
    )
    assert out.to_list() == [0.5, 0.5]


def test_weighted_sum_identity():
    out = weighted_sum([ParameterVector([3.0, -2.0])], [1.0])
    assert out.to_list() == [3.0, -2.0]


def test_weighted_sum_worked_weights():
    # 11/24 and 13/24 applied to models [0] and [1] pick out 13/24.
    out = weighted_sum(
        [ParameterVector([0.0]), ParameterVector([1.0])], [11 / 24, 13 / 24]
    )
    assert abs(out[0] - 13 / 24) < 1e-15


def test_weighted_sum_empty():
    with pytest.raises(EmptyInput):
        weighted_sum([], [])


def test_weighted_sum_dim_mismatch():
    models = [ParameterVector([1.0]), ParameterVector([1.0, 2.0])]
    with pytest.raises(DimensionMismatch):
        weighted_sum(models, [0.5, 0.5])


def test_weighted_sum_weight_count_mismatch():
    with pytest.raises(DimensionMismatch):
        weighted_sum([ParameterVector([1.0])], [0.5, 0.5])


@pytest.mark.parametrize("bad", [float("nan"), float("inf")])
def test_weighted_sum_non_finite_weight(bad):
    models = [ParameterVector([1.0]), ParameterVector([2.0])]
    with pytest.raises(NonFiniteWeight):
        weighted_sum(models, [0.5, bad])


def test_weighted_sum_linearity():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n, d = int(rng.integers(1, 6)), int(rng.integers(1, 8))
        models = [ParameterVector(rng.standard_normal(d)) for _ in range(n)]
        w = rng.standard_normal(n)
        a = float(rng.uniform(-2.0, 2.0))
        lhs = weighted_sum(models, a * w).values
        rhs = a * weighted_sum(models, w).values
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_weighted_sum_convex_hull():
    rng = np.random.default_rng(12)
    for _ in range(50):
        n, d = int(rng.integers(1, 6)), int(rng.integers(1, 8))
        stack = rng.standard_normal((n, d))
        w = rng.random(n)
        w /= w.sum()
        out = weighted_sum([ParameterVector(r) for r in stack], w).values
        assert np.all(out >= stack.min(axis=0) - 1e-12)
        assert np.all(out <= stack.max(axis=0) + 1e-12)


def test_checkpoint_round_trip(tmp_path):
    path = tmp_path / "m.fpv"
    v = ParameterVector([1.5, -2.25, 0.0])
    checkpoint_write(v, path)
    assert checkpoint_read(path) == v


def test_checkpoint_layout(tmp_path):
    path = tmp_path / "m.fpv"
    v = ParameterVector([1.5, -2.25, 0.0])
    checkpoint_write(v, path)
    raw = path.read_bytes()
    expected = MAGIC + struct.pack("<Q", 3) + struct.pack("<3d", 1.5, -2.25, 0.0)
    assert raw == expected


def test_checkpoint_round_trip_random(tmp_path):
    rng = np.random.default_rng(13)
    path = tmp_path / "m.fpv"
    for _ in range(1000):
        d = int(rng.integers(1, 4097))
        v = ParameterVector(rng.standard_normal(d) * rng.uniform(1e-8, 1e8))
        checkpoint_write(v, path)
        back = checkpoint_read(path)
        assert np.array_equal(back.values, v.values)


def test_checkpoint_bad_magic(tmp_path):
    path = tmp_path / "m.fpv"
    path.write_bytes(b"XXXX" + struct.pack("<Q", 1) + struct.pack("<d", 1.0))
    with pytest.raises(FormatError):
        checkpoint_read(path)


def test_checkpoint_truncated(tmp_path):
    path = tmp_path / "m.fpv"
    path.write_bytes(MAGIC + struct.pack("<Q", 2) + struct.pack("<d", 1.0))
    with pytest.raises(FormatError):
        checkpoint_read(path)


def test_checkpoint_trailing_bytes(tmp_path):
    path = tmp_path / "m.fpv"
    path.write_bytes(MAGIC + struct.pack("<Q", 1) + struct.pack("<d", 1.0) + b"\x00")
    with pytest.raises(FormatError):
        checkpoint_read(path)


def test_checkpoint_zero_dim(tmp_path):
    path = tmp_path / "m.fpv"
    path.write_bytes(MAGIC + struct.pack("<Q", 0))
    with pytest.raises(FormatError):
        checkpoint_read(path)


def test_checkpoint_non_finite_payload(tmp_path):
    path = tmp_path / "m.fpv"
    path.write_bytes(MAGIC + struct.pack("<Q", 1) + struct.pack("<d", float("nan")))
    with pytest.raises(FormatError):
        checkpoint_read(path)


def test_checkpoint_short_header(tmp_path):
    path = tmp_path / "m.fpv"
    path.write_bytes(b"FP")
    with pytest.raises(FormatError):
        checkpoint_read(path)
