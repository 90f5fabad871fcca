from math import log, sqrt

import numpy as np
import pytest
from hypothesis import given, strategies as st

from asldigits import layers as L
from asldigits import optim
from asldigits.errors import LabelError, NumericError, ShapeError
from gradcheck import numeric_grad, rel_error


def test_cross_entropy_examples():
    y = np.eye(10)[[3, 5]]
    loss, grad = optim.cross_entropy(y.copy(), y)
    assert loss.mean_loss == 0.0 and (grad == 0).all() and loss.batch_size == 2
    loss, _ = optim.cross_entropy(np.full((2, 10), 0.1), y)
    assert abs(loss.mean_loss - log(10)) < 1e-12
    assert abs(log(10) - 2.302585) < 1e-6
    p = np.zeros((1, 10))
    p[0, :2] = 0.5
    loss, _ = optim.cross_entropy(p, np.eye(10)[[0]])
    assert abs(loss.mean_loss - 0.693147) < 1e-6


def test_cross_entropy_saturated_wrong_prediction_is_finite():
    p = np.eye(10)[[1]]
    loss, _ = optim.cross_entropy(p, np.eye(10)[[0]])
    assert loss.mean_loss == pytest.approx(-log(1e-12))


def test_cross_entropy_rejects_bad_targets():
    with pytest.raises(LabelError):
        optim.cross_entropy(np.full((1, 10), 0.1), np.full((1, 10), 0.1))
    with pytest.raises(ShapeError):
        optim.cross_entropy(np.full((1, 10), 0.1), np.eye(5)[[0]])


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_fused_gradient_matches_finite_differences(b, seed):
    rng = np.random.default_rng(seed)
    logits = rng.normal(size=(b, 10)) * 2
    y = np.eye(10)[rng.integers(0, 10, b)]
    f = lambda: optim.cross_entropy(L.softmax(logits)[0], y)[0].mean_loss
    _, grad = optim.cross_entropy(L.softmax(logits)[0], y)
    assert rel_error(grad, numeric_grad(f, logits)) < 1e-5


@given(st.integers(0, 2**32 - 1))
def test_cross_entropy_non_negative(seed):
    rng = np.random.default_rng(seed)
    p = L.softmax(rng.normal(size=(4, 10)) * 3)[0]
    y = np.eye(10)[rng.integers(0, 10, 4)]
    assert optim.cross_entropy(p, y)[0].mean_loss > 0


def test_adadelta_init():
    params = [np.ones((2, 3)), np.ones(4)]
    st_ = optim.adadelta_init(params)
    assert [a.shape for a in st_.acc_grad_sq] == [(2, 3), (4,)]
    assert all((a == 0).all() for a in st_.acc_grad_sq + st_.acc_update_sq)
    assert st_.rho == 0.95 and st_.epsilon == 1e-6


def test_adadelta_single_scalar_step():
    p, s = optim.adadelta_step([np.array([0.0])], [np.array([1.0])],
                               optim.adadelta_init([np.zeros(1)]))
    # E[g^2] = 0.05; dx = -sqrt(1e-6) / sqrt(0.050001)
    assert s.acc_grad_sq[0][0] == pytest.approx(0.05, abs=1e-15)
    dx = -sqrt(1e-6) / sqrt(0.050001)
    assert p[0][0] == pytest.approx(dx, rel=1e-12)
    assert abs(p[0][0] - -4.4721e-3) < 1e-7
    assert s.acc_update_sq[0][0] == pytest.approx(0.05 * dx * dx, rel=1e-12)


def test_adadelta_first_step_scale_invariance():
    state = optim.adadelta_init([np.zeros(1)])
    p1, _ = optim.adadelta_step([np.zeros(1)], [np.array([1.0])], state)
    p2, _ = optim.adadelta_step([np.zeros(1)], [np.array([2.0])], state)
    assert p2[0][0] == pytest.approx(p1[0][0], rel=1e-4)


@given(st.integers(0, 2**32 - 1))
def test_adadelta_zero_gradient_fixed_point(seed):
    rng = np.random.default_rng(seed)
    params = [rng.normal(size=(3, 3)), rng.normal(size=5)]
    state = optim.adadelta_init(params)
    state.acc_update_sq = [np.abs(rng.normal(size=p.shape)) for p in params]
    new, new_state = optim.adadelta_step(params, [np.zeros_like(p) for p in params], state)
    assert all(np.array_equal(a, b) for a, b in zip(new, params))
    assert all((a >= 0).all() for a in new_state.acc_grad_sq + new_state.acc_update_sq)


def test_adadelta_errors():
    state = optim.adadelta_init([np.zeros(2)])
    with pytest.raises(ShapeError):
        optim.adadelta_step([np.zeros(2)], [np.zeros(3)], state)
    with pytest.raises(NumericError):
        optim.adadelta_step([np.zeros(2)], [np.array([np.nan, 0.0])], state)


def test_adadelta_does_not_mutate_inputs():
    params = [np.ones(3)]
    state = optim.adadelta_init(params)
    optim.adadelta_step(params, [np.ones(3)], state)
    assert (params[0] == 1).all() and (state.acc_grad_sq[0] == 0).all()


def test_accuracy_examples():
    y = np.eye(10)[[0, 1]]
    assert optim.accuracy(y, y) == 1.0
    assert optim.accuracy(np.eye(10)[[2, 3]], y) == 0.0
    assert optim.accuracy(np.eye(10)[[0, 3]], y) == 0.5
    tie = np.full((1, 10), 0.1)
    assert optim.accuracy(tie, np.eye(10)[[0]]) == 1.0


@given(st.integers(0, 2**32 - 1))
def test_accuracy_monotone_invariance(seed):
    rng = np.random.default_rng(seed)
    p = L.softmax(rng.normal(size=(16, 10)))[0]
    y = np.eye(10)[rng.integers(0, 10, 16)]
    assert optim.accuracy(np.exp(p), y) == optim.accuracy(p, y)
