"""Rotations and noise for the training split.

Rotated copies are filled with white where the turn exposes the border.
Augmentation runs after the split, so no test image leaks into training.
"""

import numpy as np

from asldigits.augment import AugmentConfig, add_noise, augment_dataset, rotate
from asldigits.data import stratified_split
from asldigits.synthetic import make_dataset

ds = make_dataset(per_class=10, seed=2)
img = ds.images[0]

for angle in (-10, 10):
    r = rotate(img, angle)
    back = rotate(r, -angle)
    inner = np.s_[16:48, 16:48]
    print(f"rotate {angle:+d}: corner {r[0, 0]:.2f}, round-trip MAE in centre "
          f"{np.abs(back[inner] - img[inner]).mean():.4f}")

noisy = add_noise(img, 0.05, seed=7)
print(f"noise sigma 0.05: mean |change| {np.abs(noisy - img).mean():.4f}, "
      f"range [{noisy.min():.2f}, {noisy.max():.2f}]")

train, test = stratified_split(ds, 0.2, seed=1)
aug = augment_dataset(train, AugmentConfig(seed=1))
print(f"train {len(train)} -> augmented {len(aug)}; test stays {len(test)}")
