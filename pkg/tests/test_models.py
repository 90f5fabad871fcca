from math import sqrt

import numpy as np
import pytest

from asldigits import models, optim
from asldigits.errors import (
    ArchitectureError,
    CheckpointMismatchError,
    MissingFileError,
    ShapeError,
)
from gradcheck import numeric_grad_kinked, rel_error
from oracles import count_params, shape_trace

# written out independently from the architecture descriptions
TABLES = {
    "mvgg5": [("conv", 16), ("conv", 16), ("pool", (2, 2)), ("conv", 48), ("pool", (2, 2)),
              ("flatten", None), ("dense", 128), ("dense", 10), ("softmax", None)],
    "mvgg9": [("conv", 16), ("conv", 16), ("pool", (2, 2)), ("conv", 32), ("conv", 32),
              ("pool", (2, 2)), ("conv", 48), ("conv", 48), ("pool", (2, 2)), ("conv", 64),
              ("pool", (4, 4)), ("flatten", None), ("dense", 128), ("dense", 10),
              ("softmax", None)],
    "proposed": [("conv", 32), ("conv", 64), ("pool", (2, 2)), ("conv", 64), ("pool", (2, 2)),
                 ("conv", 128), ("pool", (2, 2)), ("flatten", None), ("dense", 526),
                 ("dense", 128), ("dense", 10), ("softmax", None)],
}


@pytest.mark.parametrize("name", models.ARCHITECTURES)
def test_shape_table_matches_oracle(name):
    m = models.build_architecture(name)
    expected = shape_trace(TABLES[name])
    assert [tuple(s) for s in m.shapes] == expected[:-1] + [expected[-2]]


def test_proposed_shapes_and_count():
    m = models.build_architecture("proposed")
    assert m.shapes[-1] == (10,)
    assert m.shapes[7] == (8192,)
    oracle = count_params([("conv", 32), ("conv", 64), ("conv", 64), ("conv", 128),
                           ("flatten_to", 8 * 8 * 128), ("dense", 526), ("dense", 128),
                           ("dense", 10)])
    assert oracle == 4_507_864
    assert m.parameter_count() == oracle


def test_mvgg9_spatial_trace():
    m = models.build_architecture("mvgg9")
    pools = [s[1] for s, l in zip(m.shapes, m.spec.layers) if l.kind == "pool"]
    assert [64] + pools == [64, 32, 16, 8, 2]
    assert m.shapes[11] == (256,)


def test_layer_rules():
    for name in models.ARCHITECTURES:
        layers = models.build_architecture(name).spec.layers
        convs = [l for l in layers if l.kind == "conv"]
        dense = [l for l in layers if l.kind == "dense"]
        assert all(l.window == 3 and l.stride == 1 and l.relu for l in convs)
        assert all(l.relu and l.dropout == 0.5 for l in dense[:-1])
        assert not dense[-1].relu and not dense[-1].dropout
        assert layers[-1].kind == "softmax"
    sites = {n: sum(bool(l.dropout) for l in models.build_architecture(n).spec.layers)
             for n in models.ARCHITECTURES}
    assert sites == {"mvgg5": 1, "mvgg9": 1, "proposed": 2}


def test_unknown_architecture():
    with pytest.raises(ArchitectureError):
        models.build_architecture("vgg16")


def test_init_parameters():
    m = models.build_architecture("proposed")
    a = models.init_parameters(m, 42)
    b = models.init_parameters(m, 42)
    assert all(x.tobytes() == y.tobytes() for x, y in zip(a.params, b.params))
    assert all((p == 0).all() for p in a.params[1::2])
    w = a.params[8]
    assert w.shape == (8192, 526)
    bound = models.glorot_bound(w.shape)
    assert bound == sqrt(6 / 8718)
    assert abs(bound - 0.02624) < 1e-5
    assert np.abs(w).max() <= bound and np.abs(w).max() > 0.99 * bound
    conv = a.params[2]
    assert np.abs(conv).max() <= sqrt(6 / (32 * 9 + 64 * 9))
    c = models.init_parameters(m, 43)
    assert not np.array_equal(a.params[0], c.params[0])


@pytest.fixture(scope="module")
def proposed():
    return models.init_parameters(models.build_architecture("proposed"), 7)


def test_forward_eval_deterministic_and_normalized(proposed):
    x = np.random.default_rng(0).random((3, 1, 64, 64)).astype(np.float32)
    p1, _ = models.forward(proposed, x, "eval")
    p2, _ = models.forward(proposed, x, "eval")
    assert p1.tobytes() == p2.tobytes()
    assert p1.shape == (3, 10)
    assert np.all(np.abs(p1.sum(axis=1) - 1) <= 1e-6)
    assert p1.max() < 0.9


def test_forward_train_uses_dropout(proposed):
    x = np.random.default_rng(0).random((2, 1, 64, 64)).astype(np.float32)
    a, _ = models.forward(proposed, x, "train", 1)
    b, _ = models.forward(proposed, x, "train", 1)
    c, _ = models.forward(proposed, x, "train", 2)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, c)


def test_forward_rejects_bad_shape(proposed):
    with pytest.raises(ShapeError):
        models.forward(proposed, np.zeros((1, 64, 64)), "eval")
    with pytest.raises(ShapeError):
        models.forward(proposed, np.zeros((1, 1, 32, 32)), "eval")


@pytest.mark.parametrize("precision", ["f32", "f64"])
def test_checkpoint_round_trip(tmp_path, precision):
    m = models.init_parameters(models.build_architecture("mvgg5", precision=precision), 3)
    models.save_checkpoint(m, tmp_path / "a")
    back = models.load_checkpoint(tmp_path / "a")
    x = np.random.default_rng(1).random((2, 1, 64, 64))
    assert models.forward(back, x)[0].tobytes() == models.forward(m, x)[0].tobytes()
    models.save_checkpoint(back, tmp_path / "b")
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == ["manifest.json"] + [f"param_{i:03d}.npy" for i in range(10)]


def test_checkpoint_missing_file(tmp_path):
    m = models.init_parameters(models.build_architecture("mvgg5"), 3)
    models.save_checkpoint(m, tmp_path)
    (tmp_path / "param_004.npy").unlink()
    with pytest.raises(MissingFileError):
        models.load_checkpoint(tmp_path)


def test_checkpoint_architecture_mismatch(tmp_path):
    m = models.init_parameters(models.build_architecture("proposed"), 3)
    models.save_checkpoint(m, tmp_path)
    path = tmp_path / "manifest.json"
    path.write_text(path.read_text().replace('"architecture": "proposed"',
                                             '"architecture": "mvgg5"'))
    with pytest.raises(CheckpointMismatchError):
        models.load_checkpoint(tmp_path)


def test_checkpoint_swapped_parameter_file(tmp_path):
    m = models.init_parameters(models.build_architecture("mvgg5"), 3)
    models.save_checkpoint(m, tmp_path)
    (tmp_path / "param_000.npy").write_bytes((tmp_path / "param_002.npy").read_bytes())
    with pytest.raises(CheckpointMismatchError):
        models.load_checkpoint(tmp_path)


def _pattern(cache):
    """Identify the linear piece: every ReLU mask and pooling argmax."""
    parts = []
    for c, r, _ in cache["caches"]:
        if r is not None:
            parts.append(r.tobytes())
        if isinstance(c, tuple) and len(c) == 4 and isinstance(c[3], np.ndarray):
            parts.append(c[3].tobytes())
    return hash(b"".join(parts))


def shrunk_gradient_errors(name, seed, side, samples=20):
    """Per-tensor relative error between backprop and central differences.

    Returns (errors, coordinates whose step had to shrink to avoid a kink).
    """
    rng = np.random.default_rng(seed)
    m = models.init_parameters(models.build_architecture(name, side, precision="f64"), seed)
    x = rng.random((2, 1, side, side))
    y = np.eye(10)[rng.integers(0, 10, 2)]

    def loss():
        p, cache = models.forward(m, x, "train", seed)
        return optim.cross_entropy(p, y)[0].mean_loss, _pattern(cache)

    probs, cache = models.forward(m, x, "train", seed)
    _, dlogits = optim.cross_entropy(probs, y)
    grads = models.backward(m, cache, dlogits)
    errs, shrunk = [], 0
    for p, g in zip(m.params, grads):
        idx = rng.choice(p.size, min(p.size, samples), replace=False)
        num, k = numeric_grad_kinked(loss, p, idx)
        errs.append(rel_error(g.reshape(-1)[idx], num))
        shrunk += k
    return errs, shrunk


# smallest input each network's pooling geometry admits
SHRUNK_SIDE = {"mvgg5": 8, "mvgg9": 32, "proposed": 8}


@pytest.mark.parametrize("name", models.ARCHITECTURES)
def test_end_to_end_gradients(name):
    errs, _ = shrunk_gradient_errors(name, 11, SHRUNK_SIDE[name])
    assert max(errs) < 1e-3, errs
