"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys

from . import pipeline as pl
from .classifier import TrainConfig
from .errors import ConvergenceError, DataError, DivergenceError, WavefuseError
from .fusion import fuse_images, parse_rule
from .imagery import conform_pair, load_image, save_image
from .wavelet import decompose, make_filter_bank, save_pyramid

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dims(text):
    m = re.fullmatch(r"(\d+)x(\d+)", text.strip())
    if not m:
        raise argparse.ArgumentTypeError(f"expected ROWSxCOLS, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def _rule(text):
    try:
        return str(parse_rule(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser():
    p = _Parser(prog="wavefuse", description="Wavelet fusion of visual/thermal face images with PCA + MLP recognition.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("decompose", help="multilevel 2D DWT of one image")
    d.add_argument("--input", required=True)
    d.add_argument("--wavelet", default="db2")
    d.add_argument("--levels", type=int, default=5)
    d.add_argument("--mode", choices=["sym", "per"], default="sym")
    d.add_argument("--out", required=True)

    f = sub.add_parser("fuse", help="fuse one visual/thermal pair")
    f.add_argument("--visual", required=True)
    f.add_argument("--thermal", required=True)
    f.add_argument("--wavelet", default="db2")
    f.add_argument("--levels", type=int, default=5)
    f.add_argument("--mode", choices=["sym", "per"], default="sym")
    f.add_argument("--rule", type=_rule, default="average")
    f.add_argument("--zero-ca", action="store_true")
    f.add_argument("--out", required=True)

    t = sub.add_parser("train", help="fuse, fit PCA, train the MLP and report on the test split")
    t.add_argument("--dataset", required=True)
    t.add_argument("--train-per-class", type=int, default=10)
    t.add_argument("--test-per-class", type=int, default=10)
    t.add_argument("--levels", type=int, default=5)
    t.add_argument("--mode", choices=["sym", "per"], default="sym")
    t.add_argument("--rule", type=_rule, default="average")
    t.add_argument("--zero-ca", action="store_true")
    k = t.add_mutually_exclusive_group()
    k.add_argument("--pca-k", type=int)
    k.add_argument("--pca-var", type=float, default=0.95)
    t.add_argument("--hidden", type=int)
    t.add_argument("--lr", type=float, default=0.1)
    t.add_argument("--momentum", type=float, default=0.9)
    t.add_argument("--epochs", type=int, default=2000)
    t.add_argument("--target-mse", type=float, default=1e-3)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--policy", choices=["strict", "center_crop"], default="strict")
    t.add_argument("--workers", type=int, default=1)
    t.add_argument("--model-out", required=True)
    t.add_argument("--report-out", required=True)

    e = sub.add_parser("evaluate", help="score a saved model on a dataset")
    e.add_argument("--model", required=True)
    e.add_argument("--dataset", required=True)
    e.add_argument("--subset", choices=["test", "all"], default="test")
    e.add_argument("--policy", choices=["strict", "center_crop"], default="strict")
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--report-out", required=True)

    s = sub.add_parser("synth", help="write a seeded synthetic paired dataset")
    s.add_argument("--classes", type=int, default=10)
    s.add_argument("--pairs", type=int, default=20)
    s.add_argument("--dims", type=_dims, default=(64, 64))
    s.add_argument("--noise", type=float, default=0.01)
    s.add_argument("--spread", type=float, default=0.2)
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--out", required=True)
    return p


def _mode(flag):
    return "symmetric" if flag == "sym" else "periodic"


def cmd_decompose(args):
    bank = make_filter_bank(args.wavelet)
    pyramid = decompose(load_image(args.input), bank, _mode(args.mode), args.levels)
    save_pyramid(pyramid, args.out)
    print(f"{args.input}: {pyramid.levels} levels, approximation {pyramid.approximation.shape[0]}x"
          f"{pyramid.approximation.shape[1]} -> {args.out}")


def cmd_fuse(args):
    vis, thm = conform_pair(load_image(args.visual), load_image(args.thermal), "strict")
    fused = fuse_images(vis, thm, make_filter_bank(args.wavelet), _mode(args.mode), args.levels,
                        parse_rule(args.rule), args.zero_ca)
    save_image(fused, args.out)
    print(f"fused {fused.rows}x{fused.cols} -> {args.out}")


def cmd_train(args):
    try:
        config = pl.ExperimentConfig(
            levels=args.levels, boundary_mode=_mode(args.mode), rule=args.rule, zero_ca=args.zero_ca,
            train_per_class=args.train_per_class, test_per_class=args.test_per_class,
            pca_k=args.pca_k, pca_var=args.pca_var, hidden=args.hidden,
            train=TrainConfig(args.lr, args.momentum, args.epochs, args.target_mse, args.seed),
            split_seed=args.seed, init_seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    dataset = pl.scan_dataset(args.dataset, args.policy)
    model, report = pl.run_experiment(dataset, config, workers=args.workers)
    pl.save_model(model, args.model_out)
    pl.save_report(report, args.report_out)
    print(report.format_table())


def cmd_evaluate(args):
    model = pl.load_model(args.model)
    dataset = pl.scan_dataset(args.dataset, args.policy)
    report = pl.evaluate_model(model, dataset, args.subset, workers=args.workers)
    pl.save_report(report, args.report_out)
    print(report.format_table())


def cmd_synth(args):
    try:
        ds = pl.generate_synthetic_dataset(args.classes, args.pairs, args.dims, args.noise, args.spread, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    pl.write_dataset(ds, args.out)
    print(f"wrote {ds.n_classes} classes x {args.pairs} pairs ({args.dims[0]}x{args.dims[1]}) to {args.out}")


COMMANDS = {"decompose": cmd_decompose, "fuse": cmd_fuse, "train": cmd_train,
            "evaluate": cmd_evaluate, "synth": cmd_synth}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"wavefuse: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DivergenceError, ConvergenceError) as exc:
        print(f"wavefuse: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError) as exc:
        print(f"wavefuse: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (WavefuseError, ValueError) as exc:
        print(f"wavefuse: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
