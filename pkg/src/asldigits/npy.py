"""Reader and writer for the ``.npy`` single-array file format.

Layout of a version 1.0 file::

    \\x93NUMPY | major minor | header_len (uint16 LE) | dict + pad + '\\n' | payload

Version 2.0 differs only in a uint32 header length.  We read '<f4', '<f8'
and '|u1' arrays in C order; we write '<f4' or '<f8', version 1.0, padding
the dict with spaces so the whole header block is a multiple of 16 bytes.
"""

import ast
import struct
from dataclasses import dataclass
from math import prod
from pathlib import Path

import numpy as np

from .errors import (
    FormatError,
    LabelError,
    NormalizationError,
    PairingError,
    TruncationError,
    UnsupportedDtypeError,
    UnsupportedLayoutError,
)

MAGIC = b"\x93NUMPY"
ALIGN = 16
IMAGE_SIZE = 64
NUM_CLASSES = 10

_READ_DTYPES = {
    "<f4": np.dtype("<f4"),
    "<f8": np.dtype("<f8"),
    "|u1": np.dtype("u1"),
    "<u1": np.dtype("u1"),
}
_WRITE_DTYPES = {"f4": "<f4", "f8": "<f8", "<f4": "<f4", "<f8": "<f8"}


@dataclass(frozen=True)
class NpyHeader:
    version: tuple
    dtype_descr: str
    fortran_order: bool
    shape: tuple

    def header_dict(self):
        """Canonical dict text, keys in descr/fortran_order/shape order."""
        if len(self.shape) == 1:
            shape = f"({self.shape[0]},)"
        else:
            shape = "(" + ", ".join(str(d) for d in self.shape) + ")"
        return (
            f"{{'descr': '{self.dtype_descr}', 'fortran_order': {self.fortran_order}, "
            f"'shape': {shape}, }}"
        )


def encode_header(header):
    """Serialize ``header`` as a version 1.0 header block (magic through newline)."""
    text = header.header_dict()
    prefix = len(MAGIC) + 2 + 2
    pad = -(prefix + len(text) + 1) % ALIGN
    text = text + " " * pad + "\n"
    return MAGIC + bytes([1, 0]) + struct.pack("<H", len(text)) + text.encode("latin1")


def parse_header(buf):
    """Decode the header block; returns ``(header, payload_offset)``."""
    buf = memoryview(buf)
    if len(buf) < 8 or bytes(buf[:6]) != MAGIC:
        raise FormatError("missing NPY magic prefix")
    major, minor = buf[6], buf[7]
    if (major, minor) == (1, 0):
        if len(buf) < 10:
            raise TruncationError("file ends inside the header length field")
        (hlen,) = struct.unpack("<H", buf[8:10])
        start = 10
    elif (major, minor) == (2, 0):
        if len(buf) < 12:
            raise TruncationError("file ends inside the header length field")
        (hlen,) = struct.unpack("<I", buf[8:12])
        start = 12
    else:
        raise FormatError(f"unsupported NPY version {major}.{minor}")
    end = start + hlen
    if len(buf) < end:
        raise TruncationError("file ends inside the header dict")
    try:
        meta = ast.literal_eval(bytes(buf[start:end]).decode("latin1"))
    except (ValueError, SyntaxError) as exc:
        raise FormatError(f"malformed header dict: {exc}") from None
    if not isinstance(meta, dict) or set(meta) != {"descr", "fortran_order", "shape"}:
        raise FormatError(f"header dict must hold descr, fortran_order, shape; got {meta!r}")
    descr, fortran, shape = meta["descr"], meta["fortran_order"], meta["shape"]
    if not isinstance(descr, str) or descr not in _READ_DTYPES:
        raise UnsupportedDtypeError(f"unsupported dtype {descr!r}")
    if fortran is not False:
        raise UnsupportedLayoutError("fortran_order=True is not supported")
    if not isinstance(shape, tuple) or not all(isinstance(d, int) and d >= 0 for d in shape):
        raise FormatError(f"bad shape {shape!r}")
    return NpyHeader((major, minor), descr, False, shape), end


def parse_npy(data, precision=None):
    """Decode an NPY byte string into ``(NpyHeader, ndarray)``.

    Float payloads keep their width unless ``precision`` ('f32' or 'f64')
    asks otherwise; '|u1' payloads become floats in 0..255 (float32 by
    default).
    """
    header, offset = parse_header(data)
    dtype = _READ_DTYPES[header.dtype_descr]
    count = prod(header.shape)
    payload = memoryview(data)[offset:]
    if len(payload) != count * dtype.itemsize:
        raise TruncationError(
            f"payload has {len(payload)} bytes, expected {count * dtype.itemsize}"
        )
    arr = np.frombuffer(payload, dtype=dtype, count=count).reshape(header.shape)
    if precision is not None:
        target = np.float32 if precision == "f32" else np.float64
    elif dtype.kind == "u":
        target = np.float32
    else:
        target = dtype.newbyteorder("=")
    return header, arr.astype(target, copy=True)


def write_npy(t, dtype="f8"):
    """Encode ``t`` as a version 1.0 NPY byte string with dtype 'f4' or 'f8'."""
    try:
        descr = _WRITE_DTYPES[dtype]
    except KeyError:
        raise UnsupportedDtypeError(f"cannot write dtype {dtype!r}; use f4 or f8") from None
    arr = np.ascontiguousarray(t, dtype=descr)
    header = NpyHeader((1, 0), descr, False, tuple(int(d) for d in arr.shape))
    return encode_header(header) + arr.tobytes()


def read_npy(path, precision=None):
    return parse_npy(Path(path).read_bytes(), precision)[1]


def save_npy(path, t, dtype="f8"):
    Path(path).write_bytes(write_npy(t, dtype))


def load_dataset(x_bytes, y_bytes, precision="f32", tol=1e-6):
    """Parse and validate the published image/label pair.

    X must be (N, 64, 64) or (N, 64, 64, 1) with values in [0, 1] (within
    ``tol``; values inside the tolerance band are clipped).  Y must be
    (N, 10) with exactly one 1.0 per row.  The column index is taken as the
    class identity.
    """
    from .data import Dataset

    _, x = parse_npy(x_bytes, precision)
    _, y = parse_npy(y_bytes, precision)
    if x.ndim == 4 and x.shape[3] == 1:
        x = x[..., 0]
    if x.ndim != 3 or x.shape[1:] != (IMAGE_SIZE, IMAGE_SIZE):
        raise FormatError(f"X must be (N, 64, 64) or (N, 64, 64, 1), got {x.shape}")
    if y.ndim != 2 or y.shape[1] != NUM_CLASSES:
        raise FormatError(f"Y must be (N, 10), got {y.shape}")
    if x.shape[0] != y.shape[0]:
        raise PairingError(f"X has {x.shape[0]} samples but Y has {y.shape[0]}")
    lo, hi = float(x.min(initial=0.0)), float(x.max(initial=0.0))
    if lo < -tol or hi > 1.0 + tol:
        raise NormalizationError(f"X values span [{lo}, {hi}], outside [0, 1]")
    check_one_hot(y)
    x = np.clip(x, 0.0, 1.0)
    return Dataset(np.ascontiguousarray(x), np.ascontiguousarray(y))


def read_dataset(x_path, y_path, precision="f32"):
    return load_dataset(Path(x_path).read_bytes(), Path(y_path).read_bytes(), precision)


def check_one_hot(y):
    ones = y == 1.0
    zeros = y == 0.0
    bad = ~((ones | zeros).all(axis=1) & (ones.sum(axis=1) == 1))
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise LabelError(f"label row {row} is not one-hot: {y[row].tolist()}")
