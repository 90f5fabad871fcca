"""Raw photo to dataset conversion and the stratified train/test split."""

import re
from dataclasses import dataclass
from math import ceil, floor

import numpy as np

from .errors import FormatError, InputError, LabelError, SplitError
from .rng import SPLIT, make_rng

IMAGE_SIZE = 64
NUM_CLASSES = 10

# ITU-R BT.601 luma weights
LUMA = (0.299, 0.587, 0.114)


@dataclass
class RawImage:
    """8-bit image, pixels stored as a (height, width, channels) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels)
        if p.ndim == 2:
            p = p[:, :, None]
        if p.ndim != 3 or p.shape[2] not in (1, 3):
            raise InputError(f"expected (H, W, 1|3) pixels, got shape {p.shape}")
        self.pixels = np.ascontiguousarray(p, dtype=np.uint8)

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def channels(self):
        return self.pixels.shape[2]


@dataclass
class Dataset:
    """Images (N, H, W) in [0, 1] paired with one-hot labels (N, C)."""

    images: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise InputError(
                f"{len(self.images)} images but {len(self.labels)} label rows"
            )

    def __len__(self):
        return len(self.images)

    @property
    def classes(self):
        return self.labels.argmax(axis=1)

    def subset(self, idx):
        return Dataset(self.images[idx], self.labels[idx])


def _round_half_up(x):
    return np.floor(x + 0.5)


def to_grayscale(img):
    """Collapse RGB to one channel with BT.601 luma, rounded half up."""
    if img.channels != 3:
        raise InputError(f"to_grayscale needs 3 channels, got {img.channels}")
    rgb = img.pixels.astype(np.float64)
    luma = rgb[..., 0] * LUMA[0] + rgb[..., 1] * LUMA[1] + rgb[..., 2] * LUMA[2]
    return RawImage(np.clip(_round_half_up(luma), 0, 255).astype(np.uint8))


def _bilinear_axis(src_len, dst_len):
    # sample positions at target box centres, in source pixel coordinates
    pos = (np.arange(dst_len) + 0.5) * (src_len / dst_len) - 0.5
    pos = np.clip(pos, 0.0, src_len - 1)
    i0 = np.floor(pos).astype(np.intp)
    i1 = np.minimum(i0 + 1, src_len - 1)
    return i0, i1, pos - i0


def resize(img, size=IMAGE_SIZE):
    """Downsample a square one-channel image to ``size`` x ``size``.

    Integer ratios average each source box exactly; other ratios take a
    bilinear sample at each box centre.  Results are rounded half up.
    """
    if img.channels != 1:
        raise InputError("resize expects a one-channel image")
    h, w = img.height, img.width
    if h != w:
        raise InputError(f"image must be square, got {w}x{h}")
    if h < size:
        raise InputError(f"image side {h} is smaller than {size}")
    src = img.pixels[:, :, 0].astype(np.float64)
    if h == size:
        return RawImage(img.pixels.copy())
    if h % size == 0:
        k = h // size
        out = src.reshape(size, k, size, k).mean(axis=(1, 3))
    else:
        r0, r1, fr = _bilinear_axis(h, size)
        c0, c1, fc = _bilinear_axis(w, size)
        top = src[r0][:, c0] + (src[r0][:, c1] - src[r0][:, c0]) * fc
        bot = src[r1][:, c0] + (src[r1][:, c1] - src[r1][:, c0]) * fc
        out = top + (bot - top) * fr[:, None]
    return RawImage(np.clip(_round_half_up(out), 0, 255).astype(np.uint8))


def normalize(img, dtype=np.float32):
    """Map 0..255 bytes to [0, 1] by exact division by 255."""
    return (img.pixels[:, :, 0].astype(np.float64) / 255.0).astype(dtype)


def one_hot(label, num_classes=NUM_CLASSES, dtype=np.float32):
    label = int(label)
    if not 0 <= label < num_classes:
        raise LabelError(f"label {label} outside 0..{num_classes - 1}")
    v = np.zeros(num_classes, dtype=dtype)
    v[label] = 1.0
    return v


def preprocess_image(img, size=IMAGE_SIZE):
    """Full photo path: grayscale if needed, resize, normalize."""
    if img.channels == 3:
        img = to_grayscale(img)
    return normalize(resize(img, size))


def per_class_test_count(n, num_classes, test_fraction):
    return floor(test_fraction * n / num_classes)


def stratified_split(d, test_fraction=0.2, seed=0):
    """Split into (train, test) with an equal number of test samples per class.

    Each class contributes ``floor(test_fraction * N / C)`` test samples drawn
    uniformly without replacement; everything else is training data.  Both
    halves keep the original sample order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise SplitError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n, c = d.labels.shape
    need = ceil(test_fraction * n / c)
    t = per_class_test_count(n, c, test_fraction)
    classes = d.classes
    rng = make_rng(seed, SPLIT)
    test_idx = []
    for k in range(c):
        members = np.flatnonzero(classes == k)
        if len(members) < need:
            raise SplitError(
                f"class {k} has {len(members)} samples; the split needs at least {need}"
            )
        test_idx.append(rng.choice(members, size=t, replace=False))
    test_mask = np.zeros(n, dtype=bool)
    test_mask[np.concatenate(test_idx)] = True
    return d.subset(np.flatnonzero(~test_mask)), d.subset(np.flatnonzero(test_mask))


_PNM_HEADER = re.compile(rb"\A(P[1-7])(?:\s+|#[^\n]*\n)*")
_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n)*(\d+)")


def read_pnm(data):
    """Parse binary PGM (P5) or PPM (P6) with maxval 255."""
    m = _PNM_HEADER.match(data)
    if not m:
        raise FormatError("not a PNM file")
    magic = m.group(1)
    if magic not in (b"P5", b"P6"):
        raise FormatError(f"unsupported PNM variant {magic.decode()}; need P5 or P6")
    pos = 2
    values = []
    for _ in range(3):
        tok = _TOKEN.match(data, pos)
        if not tok:
            raise FormatError("malformed PNM header")
        values.append(int(tok.group(1)))
        pos = tok.end()
    width, height, maxval = values
    if maxval != 255:
        raise FormatError(f"maxval must be 255, got {maxval}")
    if pos >= len(data) or data[pos : pos + 1] not in (b" ", b"\t", b"\n", b"\r"):
        raise FormatError("missing whitespace after PNM header")
    pos += 1
    channels = 1 if magic == b"P5" else 3
    need = width * height * channels
    payload = data[pos : pos + need]
    if len(payload) < need:
        raise FormatError(f"truncated PNM payload: {len(payload)} of {need} bytes")
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return RawImage(pixels.copy())


def write_pnm(img):
    magic = b"P5" if img.channels == 1 else b"P6"
    head = b"%s\n%d %d\n255\n" % (magic, img.width, img.height)
    return head + img.pixels.tobytes()
