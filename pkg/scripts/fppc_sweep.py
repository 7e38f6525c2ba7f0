#!/usr/bin/env python3
"""Fraction of shortest paths through a top-degree core, swept over beta."""

import argparse
import csv
import sys

import numpy as np

from netmemo.flowsim import fppc
from netmemo.rplg import build_weights, sample_graph, topk_core


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=5000)
    ap.add_argument("--betas", default="2.1,2.2,2.3,2.4,2.5,2.6,2.7,2.8,2.9")
    ap.add_argument("--fraction", type=float, default=0.02)
    ap.add_argument("--by", choices=("realized", "expected"), default="realized")
    ap.add_argument("--w-bar", type=float, default=1.5)
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args(argv)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["beta", "core_fraction", "mean_fppc", "min_fppc", "max_fppc"])
    for beta in (float(b) for b in args.betas.split(",")):
        seq = build_weights(args.N, beta, args.w_bar)
        vals = []
        for seed in range(args.seeds):
            giant, _ = sample_graph(seq, seed=seed).restrict_to_giant()
            vals.append(fppc(giant, topk_core(giant, args.fraction, by=args.by, n_total=args.N)))
        out.writerow([beta, args.fraction, np.mean(vals), min(vals), max(vals)])


if __name__ == "__main__":
    main()
