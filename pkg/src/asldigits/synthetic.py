"""Procedural stand-in for the digits dataset, for tests and demos.

Each class is a dark palm with a class-specific set of raised fingers on a
white background.  Position, finger length, shading and noise vary per
sample, so the classes are learnable but not trivially separable by a
single pixel.
"""

import numpy as np

from .data import Dataset
from .rng import make_rng

# (finger count, pointing sideways) for classes 0..9
_CLASS_SHAPES = [(0, False), (1, False), (2, False), (3, False), (4, False),
                 (5, False), (1, True), (2, True), (3, True), (4, True)]


def _draw(rng, k, size):
    fingers, sideways = _CLASS_SHAPES[k]
    img = np.ones((size, size))
    yy, xx = np.mgrid[0:size, 0:size]
    s = size / 64.0
    cy = size * 0.62 + rng.uniform(-3, 3) * s
    cx = size * 0.5 + rng.uniform(-3, 3) * s
    tone = rng.uniform(0.25, 0.55)
    palm = ((yy - cy) / (12 * s)) ** 2 + ((xx - cx) / (10 * s)) ** 2 <= 1.0
    img[palm] = tone
    length = rng.uniform(14, 20) * s
    width = 2.2 * s
    for f in range(fingers):
        offset = (f - (fingers - 1) / 2.0) * 5.0 * s
        if sideways:
            ys, xs = cy - 4 * s + offset, cx + 8 * s
            mask = (np.abs(yy - ys) <= width) & (xx >= xs) & (xx <= xs + length)
        else:
            ys, xs = cy - 10 * s, cx + offset
            mask = (np.abs(xx - xs) <= width) & (yy <= ys) & (yy >= ys - length)
        img[mask] = tone
    img += rng.normal(0.0, 0.03, size=img.shape)
    return np.clip(img, 0.0, 1.0)


def make_dataset(per_class=20, size=64, seed=0, num_classes=10, dtype=np.float32):
    """Balanced synthetic dataset with ``per_class`` samples of each class, shuffled."""
    rng = make_rng(seed, 99)
    images, labels = [], []
    for k in range(num_classes):
        for _ in range(per_class):
            images.append(_draw(rng, k % len(_CLASS_SHAPES), size))
            labels.append(k)
    order = rng.permutation(len(images))
    x = np.stack(images)[order].astype(dtype)
    y = np.eye(num_classes, dtype=dtype)[np.asarray(labels)[order]]
    return Dataset(x, y)
