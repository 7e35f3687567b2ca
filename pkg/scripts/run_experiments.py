#!/usr/bin/env python3
"""Run the full battery of named experiments and collect CSV/JSON reports.

Smoke scale by default (1e6 trials); pass --full for the 1e7-trial runs the
strict-loss experiment wants. Each experiment lands in <outdir>/<name>.csv
and <outdir>/<name>.json; the script exits nonzero if any experiment's
asserted inequalities fail.

Usage:
    python scripts/run_experiments.py --outdir results [--full] [--seed N]
"""

import argparse
import sys

from mecheff.cli import main as cli_main


def run(outdir, seed, n_smoke, n_big):
    jobs = [
        ["bounds", "--k", "1..100"],
        ["gainloss", "--dist", "exponential:1", "--k", "1..8"],
        ["thm1", "--dist", "exponential:1", "--k", "1,2,5,10", "--n", str(n_smoke)],
        ["thm2", "--k", "3..8", "--n", str(n_big)],
        ["thm3", "--dist", "exponential:1", "--k", "20", "--t", "2", "--n", str(n_smoke)],
        ["regular_cx", "--k", "1..5", "--m", "1..10"],
        ["ratio", "--dist", "exponential:1", "--k", "1..10", "--n", str(n_smoke)],
        ["bk", "--dist", "uniform:1", "--k", "1..5", "--n", str(n_smoke)],
    ]
    failures = []
    for job in jobs:
        name = job[0]
        args = job + ["--seed", str(seed), "--out", f"{outdir}/{name}"]
        rc = cli_main(args)
        if rc != 0:
            failures.append((name, rc))
    return failures


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--seed", type=int, default=20240811)
    ap.add_argument("--full", action="store_true", help="1e7 trials for the strict-loss runs")
    args = ap.parse_args()

    n_smoke = 1_000_000
    n_big = 10_000_000 if args.full else n_smoke
    failures = run(args.outdir, args.seed, n_smoke, n_big)
    if failures:
        print(f"failed experiments: {failures}", file=sys.stderr)
        return 1
    print(f"all experiments passed; reports in {args.outdir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
