"""Command line entry point.

    biocombine sim  --design ex4 --methods gkme,lkme --reps 10 --out results/ex4
    biocombine data --data data/bupa.csv --label-column selector --reps 20 --out results/liver

Settings may also come from a flat ``key = value`` file given by --config;
command-line flags take precedence.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields

import numpy as np

from .experiment import DataError, ExperimentConfig, run_data, run_sim

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_grid(text: str) -> tuple:
    """Comma list ``0.1,1,10`` or log-spaced ``lo:hi:num`` in powers of ten."""
    text = text.strip()
    if ":" in text:
        lo, hi, num = text.split(":")
        return tuple(np.logspace(float(lo), float(hi), int(num)))
    return tuple(float(t) for t in text.split(",") if t.strip())


def read_config_file(path) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


_CONVERT = {
    "methods": lambda v: tuple(m.strip() for m in v.split(",") if m.strip()),
    "lambda_grid": parse_grid,
    "n_train": int, "n_test": int, "replications": int, "reps": int, "seed": int,
    "k_folds": int, "n_jobs": int, "jobs": int,
    "delta": float, "train_fraction": float,
    "standardize": lambda v: {"true": True, "yes": True, "1": True, "on": True}.get(v.lower(), False),
}
_ALIASES = {"reps": "replications", "jobs": "n_jobs", "out": "output", "data": "data_path"}


def _normalise(d: dict) -> dict:
    out = {}
    valid = {f.name for f in fields(ExperimentConfig)}
    for k, v in d.items():
        if v is None:
            continue
        if isinstance(v, str) and k in _CONVERT:
            v = _CONVERT[k](v)
        k = _ALIASES.get(k, k)
        if k not in valid:
            raise UsageError(f"unknown setting {k!r}")
        out[k] = v
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="biocombine", description="Youden-index biomarker combination studies")
    sub = p.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key = value settings file")
    common.add_argument("--methods", help="comma list from lkme,gkme,mmm,mvn,ksm,swm,lr")
    common.add_argument("--reps", type=int, dest="replications")
    common.add_argument("--seed", type=int)
    common.add_argument("--lambda-grid", dest="lambda_grid", help="comma list, or lo:hi:num exponents of ten")
    common.add_argument("--delta", type=float)
    common.add_argument("--k-folds", type=int, dest="k_folds")
    common.add_argument("--n-train", type=int, dest="n_train")
    common.add_argument("--jobs", type=int, dest="n_jobs")
    common.add_argument("--out", dest="output", help="output directory for summary.csv and replications.csv")
    common.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=None,
                        help="z-score markers with training-split statistics (default: on for data, off for sim)")
    common.add_argument("-v", "--verbose", action="store_true")

    s = sub.add_parser("sim", parents=[common], help="simulation study")
    s.add_argument("--design", choices=["ex1", "ex2", "ex3", "ex4"])
    s.add_argument("--n-test", type=int, dest="n_test")
    s.add_argument("--copula", choices=["direct", "adjusted"])

    d = sub.add_parser("data", parents=[common], help="repeated train/test splits of a CSV dataset")
    d.add_argument("--data", dest="data_path")
    d.add_argument("--label-column", dest="label_column")
    d.add_argument("--positive-label", dest="positive_label")
    d.add_argument("--train-fraction", type=float, dest="train_fraction")
    d.add_argument("--n-test", type=int, dest="n_test")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    settings = {}
    if args.config:
        try:
            settings.update(_normalise(read_config_file(args.config)))
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc.strerror}") from exc
    flags = {k: v for k, v in vars(args).items() if k not in ("config", "verbose", "mode")}
    settings.update(_normalise(flags))
    settings["mode"] = args.mode
    if args.mode == "data":
        settings.setdefault("n_train", 200)
        settings.setdefault("n_test", 10**9)
    try:
        return ExperimentConfig(**settings)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        res = run_sim(cfg) if cfg.mode == "sim" else run_data(cfg)
    except UsageError as exc:
        print(f"biocombine: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"biocombine: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"biocombine: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for m, n, mean, sd in res.summary():
        print(f"{m:5s} n_train={n:<5d} mean={mean:.4f} sd={sd:.4f}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
