"""Layer forward/backward passes, checked against central differences.

Every layer returns its output and a cache; the matching ``*_backward``
turns an upstream gradient into gradients for its inputs and parameters.
"""

import numpy as np

from asldigits import layers as L

rng = np.random.default_rng(3)
x = rng.normal(size=(2, 3, 6, 6))
w = rng.normal(size=(4, 3, 3, 3))
b = rng.normal(size=4)

out, cache = L.conv2d(x, w, b)
up = rng.normal(size=out.shape)
dx, dw, db = L.conv2d_backward(up, cache)


def loss():
    return float((L.conv2d(x, w, b)[0] * up).sum())


def numeric(p, h=1e-5):
    g = np.zeros_like(p)
    for i in np.ndindex(p.shape):
        old = p[i]
        p[i] = old + h
        fp = loss()
        p[i] = old - h
        fm = loss()
        p[i] = old
        g[i] = (fp - fm) / (2 * h)
    return g


for name, p, g in (("x", x, dx), ("w", w, dw), ("b", b, db)):
    n = numeric(p)
    err = np.linalg.norm(g - n) / (np.linalg.norm(g) + np.linalg.norm(n))
    print(f"conv d{name}: relative error {err:.1e}")

pooled, pcache = L.maxpool2d(out, 2, 2)
print("maxpool", out.shape, "->", pooled.shape)
print("gradient routed to the argmax only:",
      int((L.maxpool2d_backward(np.ones_like(pooled), pcache) != 0).sum()), "of", out.size)

p, _ = L.softmax(rng.normal(size=(3, 10)) * 50)
print("softmax row sums:", p.sum(axis=1))

kept, mask = L.dropout(np.ones((1, 10)), 0.5, "train", rng)
print("inverted dropout in training:", kept.ravel())
