#!/usr/bin/env python3
"""Run every evaluation protocol at desk scale into results/.

    python3 scripts/run_all_sweeps.py [--seed N] [--outdir results]

Equivalent to the CLI verbs sweep-ratio, sweep-known, cross-matrix, and
cross-domain with moderate sizes; takes a few minutes on a laptop CPU.
"""

import argparse

from myogate.cli import main as cli


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()
    seed = str(args.seed)
    common = ["--windows-per-class", "40", "--cnn-epochs", "15", "--gan-epochs", "50"]

    runs = [
        ["sweep-ratio", "--out", f"{args.outdir}/ratio", "--n-known", "10",
         "--unknown-counts", "5,10,15,20,30,42", "--seed", seed, *common],
        ["sweep-known", "--out", f"{args.outdir}/known", "--known-counts",
         "4,6,8,10,12,16,20", "--unknown-counts", "4,20", "--seed", seed, *common],
        ["cross-matrix", "--out", f"{args.outdir}/matrix", "--n-known", "10",
         "--ratio-counts", "5,10,15,20,30,42", "--seed", seed, *common],
        ["cross-domain", "--out", f"{args.outdir}/domain", "--n-known", "6",
         "--unknown-count", "4", "--subjects", "0,1,2", "--seed", seed,
         "--amplitude-jitter", "0.3", *common],
    ]
    for argv in runs:
        print(f"\n=== myogate {' '.join(argv)}")
        code = cli(argv)
        if code != 0:
            return code
    print(f"\nall reports under {args.outdir}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
