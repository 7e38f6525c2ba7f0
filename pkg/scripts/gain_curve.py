#!/usr/bin/env python3
"""Memorization gain g(n, m) of both codecs on the symmetric order-1 Markov source."""

import argparse
import sys

from netmemo.experiments import ExperimentConfig, run_bench_gain


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--n-grid", default="100,1000,10000,100000")
    ap.add_argument("--m-grid", default="0,65536,1048576,4194304")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)
    cfg = ExperimentConfig(
        seed=args.seed,
        trials=args.trials,
        n_grid=tuple(int(x) for x in args.n_grid.split(",")),
        m_grid=tuple(int(x) for x in args.m_grid.split(",")),
        threads=args.threads,
    )
    sys.stdout.write(run_bench_gain(cfg))


if __name__ == "__main__":
    main()
