"""Reading and writing .npy files without numpy.load / numpy.save.

The dataset ships as two arrays: X (N, 64, 64) grayscale images in [0, 1]
and Y (N, 10) one-hot labels.  This script writes such a pair with the
package's own writer, shows the header it produced, and reads it back.
"""

import tempfile
from pathlib import Path

import numpy as np

from asldigits import npy
from asldigits.synthetic import make_dataset

ds = make_dataset(per_class=3)
tmp = Path(tempfile.mkdtemp())

raw = npy.write_npy(ds.images, "f4")
header, _ = npy.parse_npy(raw)
print("header:", header.header_dict())
print("data starts at byte", len(raw) - ds.images.nbytes, "(a multiple of 16)")

(tmp / "X.npy").write_bytes(raw)
npy.save_npy(tmp / "Y.npy", ds.labels, "f4")

# files from this writer are ordinary .npy files
assert np.array_equal(np.load(tmp / "X.npy"), ds.images)

back = npy.read_dataset(tmp / "X.npy", tmp / "Y.npy")
print(f"read back {len(back)} samples, X {back.images.shape}, Y {back.labels.shape}")

# malformed inputs fail with a typed error
try:
    npy.parse_npy(raw[:-10])
except npy.TruncationError as exc:
    print("truncated file ->", type(exc).__name__, exc)
