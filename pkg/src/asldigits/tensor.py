"""Checked dense-array primitives.

Tensors are plain C-contiguous ``numpy.ndarray`` objects of ``float32`` or
``float64``.  The helpers here add the contracts numpy leaves loose: no
broadcasting other than scalar-with-tensor, explicit shape errors, and a
finiteness check on every result.
"""

from math import prod

import numpy as np

from .errors import ConstructionError, NumericError, ShapeError

PRECISIONS = {"f32": np.float32, "f64": np.float64}


def dtype_of(precision):
    try:
        return np.dtype(PRECISIONS[precision])
    except KeyError:
        raise ValueError(f"unknown precision {precision!r}; expected f32 or f64") from None


def check_shape(shape):
    shape = tuple(int(d) for d in shape)
    if any(d < 1 for d in shape):
        raise ShapeError(f"every dimension must be >= 1, got {shape}")
    return shape


def _finite(t):
    if not np.all(np.isfinite(t)):
        raise NumericError("result contains NaN or Inf")
    return t


def create(shape, fill=0.0, data=None, precision="f64"):
    """Build a tensor of ``shape`` from a fill value or explicit row-major data."""
    shape = check_shape(shape)
    dtype = dtype_of(precision)
    if data is None:
        return _finite(np.full(shape, fill, dtype=dtype))
    flat = np.asarray(data, dtype=dtype).ravel()
    if flat.size != prod(shape):
        raise ConstructionError(
            f"data has {flat.size} elements but shape {shape} needs {prod(shape)}"
        )
    return _finite(flat.reshape(shape).copy())


def matmul(a, b):
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul needs rank-2 operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"inner dimensions differ: {a.shape} @ {b.shape}")
    return _finite(a @ b)


def _binary(a, b):
    if np.isscalar(b):
        return
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape} (no broadcasting)")


def add(a, b):
    _binary(a, b)
    return _finite(a + b)


def sub(a, b):
    _binary(a, b)
    return _finite(a - b)


def mul(a, b):
    _binary(a, b)
    return _finite(a * b)


def scale(a, s):
    return _finite(a * a.dtype.type(s))


def map_unary(fn, a):
    out = np.asarray(fn(a), dtype=a.dtype)
    if out.shape != a.shape:
        raise ShapeError("unary map changed the shape")
    return _finite(out)


_OPS = {"add": add, "sub": sub, "mul": mul, "scale": scale}


def elementwise(op, a, b):
    """Dispatch by name: add, sub, mul, scale or map-unary (``b`` is the function)."""
    if op in ("map-unary", "map_unary"):
        return map_unary(b, a)
    try:
        return _OPS[op](a, b)
    except KeyError:
        raise ValueError(f"unknown elementwise op {op!r}") from None


def reshape(t, new_shape):
    new_shape = check_shape(new_shape)
    if prod(new_shape) != t.size:
        raise ShapeError(f"cannot reshape {t.shape} ({t.size} elements) to {new_shape}")
    return np.ascontiguousarray(t).reshape(new_shape)
