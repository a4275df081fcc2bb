"""Chord-arc and Ahlfors constants of power_corner domains under boundary refinement.

The corner (gamma = 1) stays put; the cusp (gamma = 2) keeps its Ahlfors
constant while the chord-arc constant grows with the sample count.
"""

import argparse
import csv
import sys

from carleson_lab import conformal_maps as cm
from carleson_lab.planar_domain import Domain, ahlfors_constant, chordarc_constant, dyadic_radii


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gammas", type=float, nargs="+", default=[1.0, 1.5, 1.75, 2.0])
    ap.add_argument("--samples", type=int, nargs="+", default=[512, 1024, 2048, 4096])
    args = ap.parse_args()

    w = csv.writer(sys.stdout)
    w.writerow(["gamma", "n", "chordarc", "ahlfors", "sagitta"])
    for g in args.gammas:
        m = cm.power_corner(g)
        for n in args.samples:
            dom = Domain.from_map(m, n)
            c = dom.curve
            centers = c.vertices[:: max(1, n // 256)]
            w.writerow([g, n, f"{chordarc_constant(c):.5g}", f"{ahlfors_constant(c, centers, dyadic_radii(c, 10)):.5g}", f"{dom.sagitta:.3g}"])


if __name__ == "__main__":
    main()
