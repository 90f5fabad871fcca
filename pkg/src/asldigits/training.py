"""Training runs, evaluation, prediction and photo preprocessing."""

import configparser
import csv
import io
import logging
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import models
from .augment import AugmentConfig, augment_dataset
from .data import NUM_CLASSES, Dataset, one_hot, preprocess_image, read_pnm, stratified_split
from .errors import ConfigError, FormatError, InputError, NumericError
from .npy import check_one_hot, parse_npy, read_dataset, save_npy
from .optim import EPSILON, RHO, LossValue, accuracy, adadelta_init, adadelta_step, cross_entropy
from .rng import DROPOUT, SHUFFLE, make_rng

log = logging.getLogger(__name__)

METRICS_FILE = "metrics.csv"
TIMING_FILE = "timing.csv"
CHECKPOINT_DIR = "checkpoint"
METRICS_COLUMNS = ("epoch", "train_loss", "train_acc", "test_acc")
EVAL_BATCH = 64


@dataclass
class TrainConfig:
    architecture: str = "proposed"
    epochs: int = 15
    batch_size: int = 32
    test_fraction: float = 0.2
    dropout: float = 0.5
    rho: float = RHO
    epsilon: float = EPSILON
    seed: int = 1
    precision: str = "f32"
    augment: AugmentConfig = None

    def __post_init__(self):
        if self.architecture not in models.ARCHITECTURES:
            raise ConfigError(f"unknown architecture {self.architecture!r}")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must be in (0, 1)")
        if self.precision not in ("f32", "f64"):
            raise ConfigError("precision must be f32 or f64")

    def flat(self):
        """Key/value view used for file headers and manifests."""
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "augment"}
        if self.augment is not None:
            for k, v in asdict(self.augment).items():
                out[f"augment.{k}"] = v
        return out


@dataclass
class MetricsRecord:
    epoch: int
    train_loss: float
    train_acc: float
    test_acc: float
    seconds: float = 0.0


# -- config files -------------------------------------------------------------

def _parse_value(kind, raw):
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    return raw.strip()


def read_config(path):
    """Read an INI-style file with a [train] section and an optional [augment] section."""
    parser = configparser.ConfigParser()
    try:
        if not parser.read(path):
            raise ConfigError(f"cannot read config file {path}")
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    return config_from_parser(parser)


def config_from_parser(parser):
    kinds = {f.name: f.type for f in fields(TrainConfig)}
    kw = {}
    if parser.has_section("train"):
        for key, raw in parser.items("train"):
            if key not in kinds or key == "augment":
                raise ConfigError(f"unknown [train] key {key!r}")
            kw[key] = _parse_value(kinds[key], raw)
    if parser.has_section("augment"):
        sec = parser["augment"]
        unknown = set(sec) - {"rotation_degrees", "noise_sigma", "noise_copies", "seed"}
        if unknown:
            raise ConfigError(f"unknown [augment] keys {sorted(unknown)}")
        aug = {}
        if "rotation_degrees" in sec:
            raw = sec["rotation_degrees"].strip()
            aug["rotation_degrees"] = [float(a) for a in raw.split(",") if a.strip()]
        if "noise_sigma" in sec:
            aug["noise_sigma"] = float(sec["noise_sigma"])
        if "noise_copies" in sec:
            aug["noise_copies"] = int(sec["noise_copies"])
        aug["seed"] = int(sec.get("seed", kw.get("seed", 1)))
        kw["augment"] = AugmentConfig(**aug)
    try:
        return TrainConfig(**kw)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def write_config(cfg, path):
    parser = configparser.ConfigParser()
    parser["train"] = {k: str(v) for k, v in cfg.flat().items() if "." not in k}
    if cfg.augment is not None:
        a = cfg.augment
        parser["augment"] = {
            "rotation_degrees": ", ".join(str(x) for x in a.rotation_degrees),
            "noise_sigma": str(a.noise_sigma),
            "noise_copies": str(a.noise_copies),
            "seed": str(a.seed),
        }
    with open(path, "w") as fh:
        parser.write(fh)


# -- metrics --------------------------------------------------------------------

def metrics_csv(cfg, records):
    """Commented config header, then one row per epoch.  Contains no timings."""
    buf = io.StringIO()
    for k, v in cfg.flat().items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRICS_COLUMNS)
    for r in records:
        w.writerow([r.epoch, f"{r.train_loss:.6f}", f"{r.train_acc:.6f}", f"{r.test_acc:.6f}"])
    return buf.getvalue()


def read_metrics(path):
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    return [
        MetricsRecord(int(r["epoch"]), float(r["train_loss"]), float(r["train_acc"]),
                      float(r["test_acc"]))
        for r in rows
    ]


# -- training -------------------------------------------------------------------

@dataclass
class TrainResult:
    model: models.Model
    records: list
    train: Dataset
    test: Dataset
    extra: dict = field(default_factory=dict)


def _mean_loss_and_acc(model, ds):
    probs = models.predict_proba(model, models.as_batch(ds.images), EVAL_BATCH)
    if len(ds) == 0:
        return 0.0, 0.0
    loss, _ = cross_entropy(probs, ds.labels.astype(probs.dtype))
    return loss.mean_loss, accuracy(probs, ds.labels)


def fit(model, train, epochs, cfg, test=None, eval_train=None, on_epoch=None):
    """Run AdaDelta training epochs on ``train``; returns ``(model, records)``.

    Each epoch shuffles with the stream (seed, SHUFFLE, epoch) and draws
    dropout masks from (seed, DROPOUT, epoch).  The last partial batch is
    kept.  ``on_epoch(record, model)`` may return True to stop early.
    Record 0 describes the untrained model.
    """
    eval_train = train if eval_train is None else eval_train
    x_all = models.as_batch(train.images).astype(model.dtype, copy=False)
    y_all = train.labels.astype(model.dtype, copy=False)
    state = adadelta_init(model.params, cfg.rho, cfg.epsilon)
    start_epoch = model.epoch

    loss0, acc0 = _mean_loss_and_acc(model, eval_train)
    test0 = _mean_loss_and_acc(model, test)[1] if test is not None else 0.0
    records = [MetricsRecord(start_epoch, loss0, acc0, test0, 0.0)]
    if on_epoch is not None and on_epoch(records[-1], model):
        return model, records

    n = len(train)
    for epoch in range(start_epoch + 1, start_epoch + epochs + 1):
        t0 = time.perf_counter()
        order = make_rng(cfg.seed, SHUFFLE, epoch).permutation(n)
        drop_rng = make_rng(cfg.seed, DROPOUT, epoch)
        total = 0.0
        for b, s in enumerate(range(0, n, cfg.batch_size)):
            idx = order[s : s + cfg.batch_size]
            probs, cache = models.forward(model, x_all[idx], "train", drop_rng)
            loss, dlogits = cross_entropy(probs, y_all[idx])
            if not np.isfinite(loss.mean_loss):
                raise NumericError(f"non-finite loss at epoch {epoch}, batch {b}")
            grads = models.backward(model, cache, dlogits)
            params, state = adadelta_step(model.params, grads, state)
            model = replace(model, params=params)
            total += loss.mean_loss * len(idx)
        model.epoch = epoch
        train_acc = _mean_loss_and_acc(model, eval_train)[1]
        test_acc = _mean_loss_and_acc(model, test)[1] if test is not None else 0.0
        rec = MetricsRecord(epoch, total / max(n, 1), train_acc, test_acc,
                            time.perf_counter() - t0)
        records.append(rec)
        log.info("epoch %d loss %.4f train %.4f test %.4f (%.1fs)", rec.epoch,
                 rec.train_loss, rec.train_acc, rec.test_acc, rec.seconds)
        if on_epoch is not None and on_epoch(rec, model):
            break
    return model, records


def train(cfg, dataset, out_dir=None, on_epoch=None):
    """Full run: split, optional augmentation of the train side, fit, save.

    Train accuracy is measured on the un-augmented training split.  With
    ``out_dir`` set, writes ``metrics.csv``, ``timing.csv`` and
    ``checkpoint/``.
    """
    train_ds, test_ds = stratified_split(dataset, cfg.test_fraction, cfg.seed)
    fit_ds = augment_dataset(train_ds, cfg.augment) if cfg.augment is not None else train_ds
    model = models.build_architecture(
        cfg.architecture, dataset.images.shape[-1], 1, cfg.dropout, cfg.precision
    )
    model = models.init_parameters(model, cfg.seed)
    model, records = fit(model, fit_ds, cfg.epochs, cfg, test=test_ds, eval_train=train_ds,
                         on_epoch=on_epoch)
    model.extra = {"config": cfg.flat()}
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / METRICS_FILE).write_text(metrics_csv(cfg, records))
        with open(out / TIMING_FILE, "w") as fh:
            fh.write("epoch,seconds\n")
            for r in records:
                fh.write(f"{r.epoch},{r.seconds:.3f}\n")
        models.save_checkpoint(model, out / CHECKPOINT_DIR)
    return TrainResult(model, records, train_ds, test_ds)


def train_files(cfg, x_path, y_path, out_dir):
    return train(cfg, read_dataset(x_path, y_path, cfg.precision), out_dir)


# -- evaluation -------------------------------------------------------------

def evaluate(model, dataset, seed, test_fraction=None):
    """Accuracy on the test split regenerated from ``seed``, overall and per class."""
    if test_fraction is None:
        test_fraction = model.extra.get("config", {}).get("test_fraction", 0.2)
    if dataset.images.shape[1:] != model.input_shape[1:]:
        raise InputError(
            f"dataset images are {dataset.images.shape[1:]}, model expects "
            f"{model.input_shape[1:]}"
        )
    _, test = stratified_split(dataset, test_fraction, seed)
    probs = models.predict_proba(model, models.as_batch(test.images), EVAL_BATCH)
    pred = probs.argmax(axis=1)
    truth = test.labels.argmax(axis=1)
    per_class = []
    for k in range(test.labels.shape[1]):
        m = truth == k
        per_class.append({"class": k, "count": int(m.sum()),
                          "accuracy": float(np.mean(pred[m] == k)) if m.any() else 0.0})
    return {
        "architecture": model.name,
        "seed": int(seed),
        "test_fraction": test_fraction,
        "n_test": len(test),
        "accuracy": accuracy(probs, test.labels),
        "per_class": per_class,
    }


def load_image(path):
    """Read a PNM photo (fully preprocessed) or a single-sample NPY (used as-is)."""
    data = Path(path).read_bytes()
    if data[:6] == b"\x93NUMPY":
        header, arr = parse_npy(data, "f32")
        if header.dtype_descr.endswith("u1"):
            arr = arr / np.float32(255.0)
        arr = np.squeeze(arr)
        if arr.ndim != 2:
            raise FormatError(f"NPY image must hold one 2-D sample, got shape {header.shape}")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise FormatError("NPY image values must lie in [0, 1]")
        return arr
    return preprocess_image(read_pnm(data))


def predict(model, image):
    """Eval-mode class id and probability row for one (H, W) image in [0, 1]."""
    if image.shape != model.input_shape[1:]:
        raise InputError(f"image is {image.shape}, model expects {model.input_shape[1:]}")
    probs, _ = models.forward(model, image[None, None], "eval")
    return int(probs[0].argmax()), probs[0]


# -- preprocessing ------------------------------------------------------------------

def read_label_manifest(path):
    """``filename,label`` lines; blank lines, '#' comments and a header row are skipped."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].startswith("#"):
                continue
            if lineno == 1 and row[-1].strip().lower() in ("label", "class"):
                continue
            if len(row) != 2:
                raise InputError(f"{path}:{lineno}: expected 'filename,label'")
            rows.append((row[0].strip(), row[1].strip()))
    return rows


def preprocess_directory(in_dir, labels_path, out_dir):
    """Convert labelled PNM photos into X.npy (N, 64, 64) and Y.npy (N, 10), float32."""
    in_dir = Path(in_dir)
    entries = read_label_manifest(labels_path)
    if not entries:
        raise InputError("no samples")
    images, labels, failures = [], [], []
    for name, raw_label in entries:
        try:
            label = int(raw_label)
            y = one_hot(label, NUM_CLASSES)
        except ValueError:
            failures.append(f"{name}: unknown label {raw_label!r}")
            continue
        try:
            x = preprocess_image(read_pnm((in_dir / name).read_bytes()))
        except (OSError, ValueError) as exc:
            failures.append(f"{name}: {exc}")
            continue
        images.append(x)
        labels.append(y)
    if failures:
        raise InputError(f"{len(failures)} file(s) failed: " + "; ".join(failures))
    x = np.stack(images).astype(np.float32)
    y = np.stack(labels).astype(np.float32)
    check_one_hot(y)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_npy(out / "X.npy", x, "f4")
    save_npy(out / "Y.npy", y, "f4")
    return Dataset(x, y)
