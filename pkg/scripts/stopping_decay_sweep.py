"""Generation totals and decay rate of the stopping-time tree across M, for every catalog map."""

import argparse
import csv
import json
import math
import sys

from carleson_lab import conformal_maps as cm
from carleson_lab.stopping_time import (
    StoppingConfig,
    build_generations,
    decay_rate,
    default_M,
    default_root,
    generation_decay,
    region_oscillations,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--depth", type=int, default=12)
    ap.add_argument("--top-samples", type=int, default=8)
    ap.add_argument("--powers", type=float, nargs="+", default=[1.0, 2.0, 3.0])
    args = ap.parse_args()

    w = csv.writer(sys.stdout)
    w.writerow(["map", "M", "regions", "generations", "rho", "max_oscillation", "log_M", "totals"])
    root = default_root()
    for m in cm.catalog():
        Ms = [math.e**j for j in args.powers] + [default_M(m)]
        for M in Ms:
            tree = build_generations(m, root, StoppingConfig(M, args.depth, args.top_samples))
            totals = generation_decay(tree)
            osc = region_oscillations(m, tree).max()
            w.writerow(
                [f"{m.tag}{json.dumps(m.params)}", f"{M:.4f}", tree.n_regions, len(totals), f"{decay_rate(tree):.4f}",
                 f"{osc:.4f}", f"{math.log(M):.4f}", " ".join(f"{t:.4g}" for t in totals)]
            )


if __name__ == "__main__":
    main()
