"""MVGG-5, MVGG-9 and the proposed CNN: specs, shapes, parameters, checkpoints."""

import json
from dataclasses import asdict, dataclass, field, replace
from math import prod, sqrt
from pathlib import Path

import numpy as np

from . import layers as L
from .errors import ArchitectureError, CheckpointMismatchError, MissingFileError, ShapeError
from .npy import read_npy, save_npy
from .rng import DROPOUT, INIT, make_rng
from .tensor import dtype_of

ARCHITECTURES = ("mvgg5", "mvgg9", "proposed")
CHECKPOINT_FORMAT = "asldigits-checkpoint/1"


@dataclass(frozen=True)
class LayerSpec:
    kind: str  # conv | pool | flatten | dense | softmax
    size: int = 0  # filters or neurons
    window: int = 0  # kernel side for conv, pooling window for pool
    stride: int = 1
    relu: bool = False
    dropout: float = 0.0


@dataclass(frozen=True)
class ArchitectureSpec:
    name: str
    layers: tuple


def _conv(n):
    return LayerSpec("conv", n, 3, 1, relu=True)


def _pool(k, s=None):
    return LayerSpec("pool", 0, k, s or k)


def _hidden(n, rate):
    return LayerSpec("dense", n, relu=True, dropout=rate)


def architecture_spec(name, dropout=0.5, num_classes=10):
    head = (LayerSpec("dense", num_classes), LayerSpec("softmax"))
    flat = LayerSpec("flatten")
    if name == "mvgg5":
        body = (_conv(16), _conv(16), _pool(2), _conv(48), _pool(2), flat, _hidden(128, dropout))
    elif name == "mvgg9":
        body = (
            _conv(16), _conv(16), _pool(2),
            _conv(32), _conv(32), _pool(2),
            _conv(48), _conv(48), _pool(2),
            _conv(64), _pool(4, 4),
            flat, _hidden(128, dropout),
        )
    elif name == "proposed":
        body = (
            _conv(32), _conv(64), _pool(2),
            _conv(64), _pool(2),
            _conv(128), _pool(2),
            flat, _hidden(526, dropout), _hidden(128, dropout),
        )
    else:
        raise ArchitectureError(f"unknown architecture {name!r}; choose from {ARCHITECTURES}")
    return ArchitectureSpec(name, body + head)


@dataclass
class Model:
    spec: ArchitectureSpec
    input_shape: tuple  # (channels, height, width)
    shapes: list  # output shape of every layer, without the batch axis
    param_shapes: list
    precision: str = "f32"
    params: list = None
    seed: int = None
    epoch: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def name(self):
        return self.spec.name

    @property
    def dtype(self):
        return dtype_of(self.precision)

    def parameter_count(self):
        return sum(prod(s) for s in self.param_shapes)


def resolve_shapes(spec, input_shape):
    """Walk the layer list, returning per-layer output shapes and parameter shapes."""
    shape = tuple(input_shape)
    shapes, params = [], []
    for i, layer in enumerate(spec.layers):
        if layer.kind == "conv":
            if len(shape) != 3:
                raise ShapeError(f"layer {i}: conv needs (C, H, W), got {shape}")
            params += [(layer.size, shape[0], layer.window, layer.window), (layer.size,)]
            shape = (layer.size,) + shape[1:]
        elif layer.kind == "pool":
            c, h, w = shape
            k, s = layer.window, layer.stride
            if h < k or w < k or (h - k) % s or (w - k) % s:
                raise ShapeError(f"layer {i}: {h}x{w} does not tile with pool {k}/{s}")
            shape = (c, (h - k) // s + 1, (w - k) // s + 1)
        elif layer.kind == "flatten":
            shape = (prod(shape),)
        elif layer.kind == "dense":
            if len(shape) != 1:
                raise ShapeError(f"layer {i}: dense needs a flat input, got {shape}")
            params += [(shape[0], layer.size), (layer.size,)]
            shape = (layer.size,)
        elif layer.kind != "softmax":
            raise ArchitectureError(f"unknown layer kind {layer.kind!r}")
        shapes.append(shape)
    return shapes, params


def build_architecture(name, input_size=64, in_channels=1, dropout=0.5, precision="f32"):
    """Resolve the named network for (in_channels, input_size, input_size) input."""
    spec = architecture_spec(name, dropout)
    input_shape = (in_channels, input_size, input_size)
    shapes, params = resolve_shapes(spec, input_shape)
    dtype_of(precision)
    return Model(spec, input_shape, shapes, params, precision)


def _fans(shape):
    if len(shape) == 4:
        field_size = shape[2] * shape[3]
        return shape[1] * field_size, shape[0] * field_size
    return shape[0], shape[1]


def glorot_bound(shape):
    fan_in, fan_out = _fans(shape)
    return sqrt(6.0 / (fan_in + fan_out))


def init_parameters(model, seed):
    """Glorot-uniform weights, zero biases, drawn from the INIT stream of ``seed``."""
    rng = make_rng(seed, INIT)
    params = []
    for shape in model.param_shapes:
        if len(shape) == 1:
            params.append(np.zeros(shape, dtype=model.dtype))
        else:
            lim = glorot_bound(shape)
            params.append(rng.uniform(-lim, lim, size=shape).astype(model.dtype))
    return replace(model, params=params, seed=seed, epoch=0)


def as_batch(images):
    """(N, H, W) images -> (N, 1, H, W)."""
    images = np.asarray(images)
    return images[:, None] if images.ndim == 3 else images


def forward(model, x, mode="eval", rng=None):
    """Run the network; returns ``(probs, cache)``.

    In train mode dropout masks are drawn from ``rng`` (a Generator or an
    integer seed) in layer order.
    """
    if model.params is None:
        raise ArchitectureError("model parameters are not initialized")
    if x.ndim != 4 or x.shape[1:] != model.input_shape:
        raise ShapeError(f"expected input (B, {model.input_shape}), got {x.shape}")
    if mode == "train" and not isinstance(rng, np.random.Generator):
        rng = make_rng(0 if rng is None else rng, DROPOUT)
    h = x.astype(model.dtype, copy=False)
    caches = []
    p = 0
    for layer in model.spec.layers:
        if layer.kind == "conv":
            h, c = L.conv2d(h, model.params[p], model.params[p + 1])
            p += 2
        elif layer.kind == "dense":
            h, c = L.dense(h, model.params[p], model.params[p + 1])
            p += 2
        elif layer.kind == "pool":
            h, c = L.maxpool2d(h, layer.window, layer.stride)
        elif layer.kind == "flatten":
            c = h.shape
            h = h.reshape(h.shape[0], -1)
        else:
            caches.append((None, None, None))
            break
        r = d = None
        if layer.relu:
            h, r = L.relu(h)
        if layer.dropout:
            h, d = L.dropout(h, layer.dropout, mode, rng)
        caches.append((c, r, d))
    probs, _ = L.softmax(h)
    return probs, {"caches": caches, "logits": h}


def backward(model, cache, dlogits):
    """Gradients of the loss for every parameter, given d(loss)/d(logits)."""
    grads = [None] * len(model.params)
    p = len(model.params)
    g = dlogits
    layers = model.spec.layers
    first_param_layer = next(i for i, l in enumerate(layers) if l.kind in ("conv", "dense"))
    for i in range(len(layers) - 1, -1, -1):
        layer = layers[i]
        c, r, d = cache["caches"][i]
        if layer.kind == "softmax":
            continue
        if d is not None:
            g = L.dropout_backward(g, d)
        if r is not None:
            g = L.relu_backward(g, r)
        if layer.kind == "conv":
            p -= 2
            g, grads[p], grads[p + 1] = L.conv2d_backward(g, c, i != first_param_layer)
        elif layer.kind == "dense":
            p -= 2
            g, grads[p], grads[p + 1] = L.dense_backward(g, c)
        elif layer.kind == "pool":
            g = L.maxpool2d_backward(g, c)
        elif layer.kind == "flatten":
            g = g.reshape(c)
    return grads


def predict_proba(model, x, batch_size=64):
    """Eval-mode probabilities for (N, C, H, W) input, computed in fixed batches."""
    out = []
    for s in range(0, len(x), batch_size):
        out.append(forward(model, x[s : s + batch_size], "eval")[0])
    return np.concatenate(out) if out else np.zeros((0, model.shapes[-1][0]), model.dtype)


# -- checkpoints ------------------------------------------------------------

MANIFEST = "manifest.json"


def param_filename(i):
    return f"param_{i:03d}.npy"


def _manifest(model):
    return {
        "format": CHECKPOINT_FORMAT,
        "architecture": model.name,
        "input_shape": list(model.input_shape),
        "precision": model.precision,
        "seed": model.seed,
        "epoch": model.epoch,
        "layers": [asdict(layer) for layer in model.spec.layers],
        "params": [
            {"file": param_filename(i), "shape": list(s)}
            for i, s in enumerate(model.param_shapes)
        ],
        "extra": model.extra,
    }


def save_checkpoint(model, path):
    """Write ``manifest.json`` plus one NPY file per parameter tensor.

    Parameters are stored at the model's precision so a reload is bitwise
    identical.
    """
    if model.params is None:
        raise ArchitectureError("cannot checkpoint an uninitialized model")
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    dtype = "f4" if model.precision == "f32" else "f8"
    for i, t in enumerate(model.params):
        save_npy(path / param_filename(i), t, dtype)
    text = json.dumps(_manifest(model), indent=2) + "\n"
    (path / MANIFEST).write_text(text)


def load_checkpoint(path):
    path = Path(path)
    mpath = path / MANIFEST
    if not mpath.is_file():
        raise MissingFileError(f"no {MANIFEST} in {path}")
    try:
        meta = json.loads(mpath.read_text())
    except json.JSONDecodeError as exc:
        raise CheckpointMismatchError(f"unreadable manifest: {exc}") from None
    if meta.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointMismatchError(f"unknown checkpoint format {meta.get('format')!r}")
    name = meta["architecture"]
    layers = [LayerSpec(**d) for d in meta["layers"]]
    dense_rates = [l.dropout for l in layers if l.dropout]
    c, h, w = meta["input_shape"]
    if h != w:
        raise CheckpointMismatchError("non-square input shape in manifest")
    model = build_architecture(
        name, h, c, dense_rates[0] if dense_rates else 0.5, meta["precision"]
    )
    if tuple(layers) != model.spec.layers:
        raise CheckpointMismatchError(f"manifest layer list does not match {name}")
    if len(meta["params"]) != len(model.param_shapes):
        raise CheckpointMismatchError(
            f"{name} has {len(model.param_shapes)} parameter tensors, "
            f"manifest lists {len(meta['params'])}"
        )
    params = []
    for i, (entry, shape) in enumerate(zip(meta["params"], model.param_shapes)):
        fpath = path / param_filename(i)
        if not fpath.is_file():
            raise MissingFileError(f"missing parameter file {fpath.name}")
        t = read_npy(fpath, model.precision)
        if t.shape != shape or tuple(entry["shape"]) != shape:
            raise CheckpointMismatchError(
                f"{fpath.name} has shape {t.shape}, {name} expects {shape}"
            )
        params.append(t)
    return replace(
        model,
        params=params,
        seed=meta.get("seed"),
        epoch=meta.get("epoch", 0),
        extra=meta.get("extra", {}),
    )
