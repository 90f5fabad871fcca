"""Categorical cross-entropy, the AdaDelta update rule and accuracy."""

from dataclasses import dataclass

import numpy as np

from .errors import LabelError, NumericError, ShapeError

RHO = 0.95
EPSILON = 1e-6
PROB_FLOOR = 1e-12


@dataclass
class LossValue:
    mean_loss: float
    batch_size: int


def cross_entropy(probs, targets):
    """Mean categorical cross-entropy and its gradient w.r.t. the logits.

    The gradient uses the softmax/cross-entropy identity (p - y) / B, so the
    probability floor inside the log never touches it.
    """
    if probs.shape != targets.shape or probs.ndim != 2:
        raise ShapeError(f"probs {probs.shape} and targets {targets.shape} must match")
    ones = targets == 1
    if not ((ones | (targets == 0)).all() and (ones.sum(axis=1) == 1).all()):
        raise LabelError("targets must be one-hot rows")
    b = probs.shape[0]
    picked = probs[ones]
    loss = float(-np.log(np.maximum(picked.astype(np.float64), PROB_FLOOR)).mean())
    grad = (probs - targets) / probs.dtype.type(b)
    return LossValue(loss, b), grad


@dataclass
class OptimizerState:
    """Running averages of squared gradients and squared updates, per parameter."""

    acc_grad_sq: list
    acc_update_sq: list
    rho: float = RHO
    epsilon: float = EPSILON


def adadelta_init(params, rho=RHO, epsilon=EPSILON):
    if hasattr(params, "params"):
        params = params.params
    return OptimizerState(
        [np.zeros_like(p) for p in params],
        [np.zeros_like(p) for p in params],
        rho,
        epsilon,
    )


def adadelta_step(params, grads, state):
    """One AdaDelta update; returns ``(new_params, new_state)``.

    Per element::

        E[g^2]  <- rho E[g^2] + (1 - rho) g^2
        dx      <- -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
        E[dx^2] <- rho E[dx^2] + (1 - rho) dx^2
        x       <- x + dx

    The inputs are left untouched.
    """
    if len(params) != len(grads) or len(params) != len(state.acc_grad_sq):
        raise ShapeError("params, grads and optimizer state have different lengths")
    rho, eps = state.rho, state.epsilon
    new_p, new_g2, new_dx2 = [], [], []
    for x, g, eg2, edx2 in zip(params, grads, state.acc_grad_sq, state.acc_update_sq):
        if g.shape != x.shape or eg2.shape != x.shape:
            raise ShapeError(f"gradient shape {g.shape} does not match parameter {x.shape}")
        if not np.all(np.isfinite(g)):
            raise NumericError("gradient contains NaN or Inf")
        t = x.dtype.type
        eg2 = t(rho) * eg2 + t(1 - rho) * (g * g)
        dx = -(np.sqrt(edx2 + t(eps)) / np.sqrt(eg2 + t(eps))) * g
        edx2 = t(rho) * edx2 + t(1 - rho) * (dx * dx)
        new_p.append(x + dx)
        new_g2.append(eg2)
        new_dx2.append(edx2)
    return new_p, OptimizerState(new_g2, new_dx2, rho, eps)


def accuracy(probs, targets):
    """Fraction of rows whose argmax matches the target's (ties -> lowest index)."""
    if probs.shape != targets.shape:
        raise ShapeError(f"probs {probs.shape} and targets {targets.shape} must match")
    if len(probs) == 0:
        return 0.0
    return float(np.mean(probs.argmax(axis=1) == targets.argmax(axis=1)))
