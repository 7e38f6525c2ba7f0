#!/usr/bin/env python3
"""Network-wide gain G over core fraction and beta at fixed g."""

import argparse
import sys

from netmemo.experiments import ExperimentConfig, run_simulation


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=2000)
    ap.add_argument("--betas", default="2.2,2.5,2.7,2.8")
    ap.add_argument("--fractions", default="0.025,0.05,0.1")
    ap.add_argument("--g", default="3")
    ap.add_argument("--replicates", type=int, default=5)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)
    cfg = ExperimentConfig(
        N=args.N,
        betas=tuple(float(b) for b in args.betas.split(",")),
        core_fractions=tuple(float(f) for f in args.fractions.split(",")),
        g=args.g,
        replicates=args.replicates,
        with_fppc=False,
        threads=args.threads,
    )
    result = run_simulation(cfg)
    print("beta,core_fraction,G,G_plain")
    for s in result.summary():
        print(f"{s['beta']},{s['core_fraction']},{s['G']:.6f},{s['G_plain']:.6f}")
    sys.stdout.flush()


if __name__ == "__main__":
    main()
