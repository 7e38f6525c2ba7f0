#!/usr/bin/env python3
"""Plain shortest-path routing versus effective routing as g grows."""

import argparse
import csv
import sys

from netmemo.flowsim import MemoryDeployment, hop_distances, network_gain, plain_routing_gain
from netmemo.rplg import build_weights, sample_graph, topk_core


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=2000)
    ap.add_argument("--beta", type=float, default=2.5)
    ap.add_argument("--fraction", type=float, default=0.025)
    ap.add_argument("--gains", default="1.5,2,3,5,10,20,50,100")
    ap.add_argument("--rule", choices=("first", "best"), default="first")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    giant, _ = sample_graph(build_weights(args.N, args.beta, 1.5), seed=args.seed).restrict_to_giant()
    core = topk_core(giant, args.fraction, n_total=args.N)
    dist = hop_distances(giant)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["g", "G_effective", "G_plain"])
    for g in args.gains.split(","):
        dep = MemoryDeployment(core.nodes, g)
        out.writerow([g, float(network_gain(giant, dep)), float(plain_routing_gain(giant, dep, dist, rule=args.rule))])


if __name__ == "__main__":
    main()
