"""From a camera photo to a 64x64 training sample.

Photos arrive as 8-bit RGB.  They are converted to luma, shrunk to 64x64
and scaled to [0, 1].  The same pipeline backs ``asldigits preprocess``.
"""

import numpy as np

from asldigits.data import RawImage, preprocess_image, read_pnm, resize, to_grayscale, write_pnm

rng = np.random.default_rng(0)
h = w = 300  # not a multiple of 64, so resize interpolates
yy, xx = np.mgrid[0:h, 0:w]
rgb = np.stack([xx * 255 // w, yy * 255 // h, np.full((h, w), 128)], axis=-1).astype(np.uint8)
photo = RawImage(rgb)

gray = to_grayscale(photo)
small = resize(gray)
print("photo", photo.pixels.shape, "-> gray", gray.pixels.shape, "-> resized", small.pixels.shape)

x = preprocess_image(photo)
print(f"sample {x.shape} {x.dtype}, range [{x.min():.3f}, {x.max():.3f}]")

# PNM (P5/P6) is the on-disk photo format the CLI reads
assert np.array_equal(read_pnm(write_pnm(photo)).pixels, photo.pixels)
print("PNM round trip ok")
