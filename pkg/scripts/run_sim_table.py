"""Simulation table: mean test Youden per design and method, next to a Monte-Carlo Bayes reference.

    python3 scripts/run_sim_table.py --designs ex1,ex4 --reps 20 --jobs 4 --out results/sim_table
"""

import argparse
import logging
from pathlib import Path

from biocombine.experiment import METHODS, ExperimentConfig, run_sim
from biocombine.simgen import MC, SimDesign, bayes_reference, make_rng


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--designs", default="ex1,ex2,ex3,ex4")
    ap.add_argument("--methods", default=",".join(METHODS))
    ap.add_argument("--n-train", type=int, default=500)
    ap.add_argument("--n-test", type=int, default=2000)
    ap.add_argument("--reps", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--mc", type=int, default=200_000, help="Monte-Carlo draws for the Bayes reference")
    ap.add_argument("--out", default="results/sim_table")
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)

    methods = tuple(args.methods.split(","))
    print(f"{'design':7s}{'bayes':>9s}" + "".join(f"{m:>16s}" for m in methods))
    for d in args.designs.split(","):
        ref, _ = bayes_reference(SimDesign(d), args.mc, make_rng(args.seed, 0, MC))
        cfg = ExperimentConfig(design=d, methods=methods, n_train=args.n_train, n_test=args.n_test,
                               replications=args.reps, seed=args.seed, n_jobs=args.jobs,
                               output=str(Path(args.out) / d))
        res = run_sim(cfg)
        cells = "".join(f"{mean:9.3f} ({se:.3f})" for _, _, mean, se in res.summary())
        print(f"{d:7s}{ref:9.3f}{cells}", flush=True)


if __name__ == "__main__":
    main()
