"""Liver-disorder study: single-marker Youden indices and repeated 200/145 split comparison.

Expects the BUPA data as CSV with a 'selector' column (data/bupa.csv).

    python3 scripts/run_liver.py --reps 100 --jobs 4 --out results/liver
"""

import argparse
import logging

from biocombine.experiment import METHODS, ExperimentConfig, ingest_csv, run_data
from biocombine.metrics import marker_youden


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--data", default="data/bupa.csv")
    ap.add_argument("--methods", default=",".join(METHODS))
    ap.add_argument("--reps", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--no-standardize", action="store_true", help="fit on raw marker units")
    ap.add_argument("--out", default="results/liver")
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)

    data = ingest_csv(args.data, "selector", "1")
    names = ["mcv", "alkphos", "sgpt", "sgot", "gammagt", "drinks"]
    print("single-marker Youden (full data, either orientation)")
    for j, name in enumerate(names):
        print(f"  {name:8s} {marker_youden(data.X[:, j], data.y):.3f}")

    cfg = ExperimentConfig(mode="data", data_path=args.data, methods=tuple(args.methods.split(",")), n_train=200,
                           n_test=145, replications=args.reps, seed=args.seed, n_jobs=args.jobs,
                           standardize=not args.no_standardize, output=args.out)
    res = run_data(cfg, data)
    print(f"\n{args.reps} random 200/145 splits: mean test Youden (standard error)")
    for m, _, mean, se in res.summary():
        print(f"  {m:5s} {mean:.3f} ({se:.3f})")
    print(f"per-split values for boxplots: {args.out}/replications.csv")


if __name__ == "__main__":
    main()
