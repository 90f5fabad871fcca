"""Training-set augmentation: small rotations about the centre and pixel noise."""

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import ParameterError
from .rng import MASK64, NOISE, make_rng

MAX_ANGLE = 15.0
MAX_SIGMA = 0.2
FILL = 1.0  # white background


@dataclass
class AugmentConfig:
    rotation_degrees: list = field(default_factory=lambda: [-10.0, -5.0, 5.0, 10.0])
    noise_sigma: float = 0.05
    noise_copies: int = 1
    seed: int = 0

    def __post_init__(self):
        self.rotation_degrees = [float(a) for a in self.rotation_degrees]
        for a in self.rotation_degrees:
            if abs(a) > MAX_ANGLE:
                # larger turns can change what a sign means
                raise ParameterError(f"rotation {a} exceeds +/-{MAX_ANGLE} degrees")
        if not 0.0 <= self.noise_sigma <= MAX_SIGMA:
            raise ParameterError(f"noise_sigma must be in [0, {MAX_SIGMA}]")
        if self.noise_copies < 0:
            raise ParameterError("noise_copies must be >= 0")


def rotate(img, degrees, fill=FILL):
    """Rotate a 2-D image about its centre; positive angles turn it counter-clockwise.

    Each output pixel samples the source by inverse mapping with bilinear
    interpolation.  Anything sampled from outside the source reads ``fill``.
    """
    if degrees % 360 == 0:
        return img.copy()
    h, w = img.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    th = np.deg2rad(degrees)
    cos, sin = np.cos(th), np.sin(th)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    dy, dx = yy - cy, xx - cx
    # rows grow downwards, so a counter-clockwise turn on screen is this map
    sx = cx + cos * dx - sin * dy
    sy = cy + sin * dx + cos * dy
    # one pixel of fill around the source lets the interpolation fade to white
    src = np.pad(img.astype(np.float64), 1, constant_values=fill)
    sy, sx = sy + 1.0, sx + 1.0
    outside = (sy < 0) | (sy > h + 1) | (sx < 0) | (sx > w + 1)
    sy = np.clip(sy, 0, h + 1)
    sx = np.clip(sx, 0, w + 1)
    y0 = np.minimum(np.floor(sy).astype(np.intp), h)
    x0 = np.minimum(np.floor(sx).astype(np.intp), w)
    fy, fx = sy - y0, sx - x0
    top = src[y0, x0] + (src[y0, x0 + 1] - src[y0, x0]) * fx
    bot = src[y0 + 1, x0] + (src[y0 + 1, x0 + 1] - src[y0 + 1, x0]) * fx
    out = top + (bot - top) * fy
    out[outside] = fill
    return out.astype(img.dtype)


def add_noise(img, sigma, seed):
    """Add i.i.d. N(0, sigma^2) noise and clamp to [0, 1]."""
    if sigma < 0:
        raise ParameterError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img.copy()
    noise = make_rng(seed, NOISE).normal(0.0, sigma, size=img.shape)
    return np.clip(img + noise, 0.0, 1.0).astype(img.dtype)


def augment_dataset(train, cfg):
    """Originals, then one rotated block per angle, then the noisy blocks.

    Only ever called on training data.  Noisy copy ``k`` of image ``i`` uses
    the seed ``cfg.seed ^ (k * N + i)``.
    """
    n = len(train)
    images = [train.images]
    for angle in cfg.rotation_degrees:
        images.append(np.stack([rotate(x, angle) for x in train.images]) if n else train.images)
    for k in range(cfg.noise_copies):
        images.append(
            np.stack([
                add_noise(x, cfg.noise_sigma, (cfg.seed ^ (k * n + i)) & MASK64)
                for i, x in enumerate(train.images)
            ]) if n else train.images
        )
    reps = 1 + len(cfg.rotation_degrees) + cfg.noise_copies
    return Dataset(np.concatenate(images), np.concatenate([train.labels] * reps))
