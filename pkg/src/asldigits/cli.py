"""Command line entry point: preprocess, train, eval, predict.

Failures exit with status 1 and print one line to stderr::

    error: <ErrorClass>: <message>
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import models, training as T
from .errors import AslDigitsError
from .npy import read_dataset


def cmd_preprocess(args):
    ds = T.preprocess_directory(args.in_dir, args.labels, args.out)
    print(f"wrote {len(ds)} samples to {args.out}")


def cmd_train(args):
    cfg = T.read_config(args.config)
    result = T.train_files(cfg, args.x, args.y, args.out)
    last = result.records[-1]
    print(f"epoch {last.epoch}: train_loss {last.train_loss:.4f} "
          f"train_acc {last.train_acc:.4f} test_acc {last.test_acc:.4f}")


def cmd_eval(args):
    model = models.load_checkpoint(args.checkpoint)
    ds = read_dataset(args.x, args.y, model.precision)
    report = T.evaluate(model, ds, args.seed)
    print(f"test accuracy {report['accuracy']:.4f} on {report['n_test']} samples")
    for row in report["per_class"]:
        print(f"class {row['class']}: {row['accuracy']:.4f} ({row['count']})")
    out = Path(args.report) if args.report else Path(args.checkpoint) / "eval_report.json"
    out.write_text(json.dumps(report, indent=2) + "\n")


def cmd_predict(args):
    model = models.load_checkpoint(args.checkpoint)
    label, probs = T.predict(model, T.load_image(args.image))
    print(label)
    print(" ".join(f"{p:.6f}" for p in np.asarray(probs, dtype=np.float64)))


def build_parser():
    p = argparse.ArgumentParser(prog="asldigits", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log every epoch")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("preprocess", help="convert PNM photos to X.npy / Y.npy")
    s.add_argument("--in", dest="in_dir", required=True, help="directory of P5/P6 images")
    s.add_argument("--labels", required=True, help="CSV of filename,label")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_preprocess)

    s = sub.add_parser("train", help="train a network and write metrics + checkpoint")
    s.add_argument("--config", required=True)
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", help="test-split accuracy of a checkpoint")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--seed", type=int, required=True, help="split seed used in training")
    s.add_argument("--report", help="JSON report path (default: <checkpoint>/eval_report.json)")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("predict", help="classify one PNM or NPY image")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--image", required=True)
    s.set_defaults(func=cmd_predict)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        args.func(args)
    except (AslDigitsError, OSError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
