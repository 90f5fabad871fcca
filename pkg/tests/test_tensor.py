import numpy as np
import pytest
from hypothesis import given, strategies as st

from asldigits import tensor as T
from asldigits.errors import ConstructionError, NumericError, ShapeError


def test_create_fill_and_data():
    assert T.create((2, 2), fill=0.0).tolist() == [[0, 0], [0, 0]]
    assert T.create((3,), data=[1, 2, 3]).tolist() == [1, 2, 3]
    with pytest.raises(ConstructionError):
        T.create((2, 2), data=[1, 2, 3])
    with pytest.raises(ShapeError):
        T.create((0, 2))


def test_create_precision():
    assert T.create((2,), precision="f32").dtype == np.float32
    assert T.create((2,), precision="f64").dtype == np.float64


def test_matmul_examples():
    a = T.create((2, 2), data=[1, 2, 3, 4])
    b = T.create((2, 2), data=[5, 6, 7, 8])
    # 1*5+2*7, 1*6+2*8, 3*5+4*7, 3*6+4*8
    assert T.matmul(a, b).tolist() == [[19, 22], [43, 50]]
    assert np.array_equal(T.matmul(a, np.eye(2)), a)
    with pytest.raises(ShapeError):
        T.matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_elementwise_examples():
    a, b = np.array([1.0, 2.0]), np.array([3.0, 4.0])
    assert T.elementwise("add", a, b).tolist() == [4, 6]
    assert T.elementwise("scale", a, 0).tolist() == [0, 0]
    assert T.elementwise("map-unary", a, np.negative).tolist() == [-1, -2]
    with pytest.raises(ShapeError):
        T.add(np.ones(2), np.ones(3))


def test_non_finite_results_are_rejected():
    with np.errstate(over="ignore"), pytest.raises(NumericError):
        T.scale(np.array([1e308]), 10.0)


def test_reshape():
    t = np.arange(4.0)
    assert T.reshape(t, (2, 2)).tolist() == [[0, 1], [2, 3]]
    assert np.array_equal(T.reshape(t, (4,)), t)
    with pytest.raises(ShapeError):
        T.reshape(t, (3,))


def _triple_loop(a, b):
    m, k = a.shape
    n = b.shape[1]
    out = np.zeros((m, n))
    for i in range(m):
        for j in range(n):
            s = 0.0
            for p in range(k):
                s += a[i, p] * b[p, j]
            out[i, j] = s
    return out


@given(st.integers(1, 16), st.integers(1, 16), st.integers(0, 2**32 - 1))
def test_matmul_identity(m, n, seed):
    a = np.random.default_rng(seed).normal(size=(m, n))
    assert np.array_equal(T.matmul(a, np.eye(n)), a)
    assert np.array_equal(T.matmul(np.eye(m), a), a)


@given(st.integers(0, 2**32 - 1))
def test_matmul_matches_scalar_loops(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=(8, 8)), rng.normal(size=(8, 8))
    assert np.max(np.abs(T.matmul(a, b) - _triple_loop(a, b))) < 1e-12


@given(st.sampled_from([(24,), (2, 12), (3, 8), (2, 3, 4), (4, 6), (1, 24)]),
       st.sampled_from([(24,), (6, 4), (2, 2, 6), (1, 2, 3, 4)]))
def test_reshape_round_trip(s1, s2):
    t = np.random.default_rng(0).normal(size=s1)
    back = T.reshape(T.reshape(t, s2), s1)
    assert back.tobytes() == t.tobytes() and back.shape == t.shape


@given(st.integers(0, 2**32 - 1), st.sampled_from(["f32", "f64"]))
def test_add_mul_commute(seed, precision):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(5, 7)).astype(T.dtype_of(precision))
    b = rng.normal(size=(5, 7)).astype(T.dtype_of(precision))
    assert T.add(a, b).tobytes() == T.add(b, a).tobytes()
    assert T.mul(a, b).tobytes() == T.mul(b, a).tobytes()
