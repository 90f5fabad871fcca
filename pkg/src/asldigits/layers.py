"""Forward and backward passes for the layer kinds used by the networks.

Every forward function returns ``(output, cache)`` and the matching
``*_backward`` takes the upstream gradient plus that cache.  Image tensors
are laid out (batch, channel, row, col).
"""

import numpy as np

from . import tensor
from .errors import ParameterError, ShapeError


def _im2col(xp, k, h, w):
    """Patches of the padded input as a (B, C*k*k, h*w) array."""
    b, c = xp.shape[:2]
    cols = np.empty((b, c, k, k, h, w), dtype=xp.dtype)
    for i in range(k):
        for j in range(k):
            cols[:, :, i, j] = xp[:, :, i : i + h, j : j + w]
    return cols.reshape(b, c * k * k, h * w)


def conv2d(x, weights, bias):
    """Stride-1 'same' cross-correlation: zero padding of k//2 on every side.

    x: (B, Cin, H, W); weights: (Cout, Cin, k, k) with k odd; bias: (Cout,).
    """
    if x.ndim != 4:
        raise ShapeError(f"conv2d input must be (B, C, H, W), got {x.shape}")
    cout, cin, k, k2 = weights.shape
    if k != k2 or k % 2 == 0:
        raise ShapeError(f"kernel must be square with odd side, got {k}x{k2}")
    if x.shape[1] != cin:
        raise ShapeError(f"input has {x.shape[1]} channels, kernel expects {cin}")
    b, _, h, w = x.shape
    pad = k // 2
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    cols = _im2col(xp, k, h, w)
    out = np.matmul(weights.reshape(cout, -1), cols)
    out += bias[:, None]
    return out.reshape(b, cout, h, w), (x.shape, cols, weights)


def conv2d_backward(dout, cache, need_input_grad=True):
    """Returns (dx, dweights, dbias); dx is None when not requested."""
    in_shape, cols, weights = cache
    b, cout, h, w = dout.shape
    _, cin, k, _ = weights.shape
    d2 = dout.reshape(b, cout, h * w)
    dbias = d2.sum(axis=(0, 2))
    dweights = np.matmul(d2, cols.transpose(0, 2, 1)).sum(axis=0).reshape(weights.shape)
    if not need_input_grad:
        return None, dweights, dbias
    dcols = np.matmul(weights.reshape(cout, -1).T, d2).reshape(b, cin, k, k, h, w)
    pad = k // 2
    dxp = np.zeros((b, cin, h + 2 * pad, w + 2 * pad), dtype=dout.dtype)
    for i in range(k):
        for j in range(k):
            dxp[:, :, i : i + h, j : j + w] += dcols[:, :, i, j]
    return dxp[:, :, pad : pad + h, pad : pad + w].copy(), dweights, dbias


def maxpool2d(x, window=2, stride=None):
    """Max over k x k windows; ties go to the first element in row-major order.

    Returns ``(output, cache)``; the cache holds the flat argmax positions.
    """
    k = window
    s = stride or window
    if x.ndim != 4:
        raise ShapeError(f"maxpool2d input must be (B, C, H, W), got {x.shape}")
    b, c, h, w = x.shape
    if h < k or w < k or (h - k) % s or (w - k) % s:
        raise ShapeError(f"{h}x{w} input does not tile with window {k} stride {s}")
    ho, wo = (h - k) // s + 1, (w - k) // s + 1
    if k == s:
        win = x.reshape(b, c, ho, k, wo, k).transpose(0, 1, 2, 4, 3, 5)
    else:
        win = np.lib.stride_tricks.sliding_window_view(x, (k, k), axis=(2, 3))[:, :, ::s, ::s]
    win = win.reshape(b, c, ho, wo, k * k)
    arg = win.argmax(axis=-1)
    out = np.take_along_axis(win, arg[..., None], axis=-1)[..., 0]
    return out, (x.shape, k, s, arg)


def maxpool2d_backward(dout, cache):
    in_shape, k, s, arg = cache
    b, c, h, w = in_shape
    ho, wo = arg.shape[2:]
    if k == s:
        dwin = np.zeros((b, c, ho, wo, k * k), dtype=dout.dtype)
        np.put_along_axis(dwin, arg[..., None], dout[..., None], axis=-1)
        dx = dwin.reshape(b, c, ho, wo, k, k).transpose(0, 1, 2, 4, 3, 5)
        return dx.reshape(in_shape)
    rows = np.arange(ho)[:, None] * s + arg // k
    cols = np.arange(wo)[None, :] * s + arg % k
    dx = np.zeros((b, c, h * w), dtype=dout.dtype)
    flat = (rows * w + cols).reshape(b, c, -1)
    bi = np.arange(b)[:, None, None]
    ci = np.arange(c)[None, :, None]
    np.add.at(dx, (bi, ci, flat), dout.reshape(b, c, -1))
    return dx.reshape(in_shape)


def dense(x, weights, bias):
    """x @ weights + bias for x (B, F), weights (F, out), bias (out,)."""
    if x.ndim != 2 or x.shape[1] != weights.shape[0]:
        raise ShapeError(f"dense input {x.shape} does not match weights {weights.shape}")
    return tensor.matmul(x, weights) + bias, (x, weights)


def dense_backward(dout, cache):
    x, weights = cache
    return dout @ weights.T, x.T @ dout, dout.sum(axis=0)


def relu(x):
    mask = x > 0
    return np.where(mask, x, x.dtype.type(0)), mask


def relu_backward(dout, mask):
    # subgradient 0 at x == 0
    return dout * mask


def softmax(logits):
    """Row-wise softmax with max subtraction, safe for large |logits|."""
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    p = e / e.sum(axis=1, keepdims=True)
    return p, p


def softmax_backward(dout, probs):
    return probs * (dout - (dout * probs).sum(axis=1, keepdims=True))


def dropout(x, p_drop=0.5, mode="train", rng=None):
    """Inverted dropout.  Returns ``(output, mask)`` with mask in {0, 1/(1-p)}."""
    if not 0.0 <= p_drop < 1.0:
        raise ParameterError(f"dropout rate must be in [0, 1), got {p_drop}")
    if mode not in ("train", "eval"):
        raise ParameterError(f"mode must be 'train' or 'eval', got {mode!r}")
    if mode == "eval" or p_drop == 0.0:
        return x, np.ones_like(x)
    if rng is None:
        raise ParameterError("train-mode dropout needs a random generator")
    keep = rng.random(x.shape) >= p_drop
    mask = keep * x.dtype.type(1.0 / (1.0 - p_drop))
    return x * mask, mask


def dropout_backward(dout, mask):
    return dout * mask
