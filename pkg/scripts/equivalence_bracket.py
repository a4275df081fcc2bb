"""Square/ball equivalence ratios on the seeded random suite, swept over beta.

Single atoms sit between ``(8 pi)**-beta`` and ``(4 pi)**-beta``, so the
bracket constant K grows like ``(8 pi)**beta``; the sweep prints the
measured K next to that prediction.
"""

import argparse
import csv
import math
import sys

from carleson_lab.carleson_checkers import luecking_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--betas", type=float, nargs="+", default=[1.1, 1.25, 1.5, 2.0, 3.0])
    ap.add_argument("--depth", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--measures", type=int, default=100)
    args = ap.parse_args()

    w = csv.writer(sys.stdout)
    w.writerow(["beta", "lo", "hi", "K", "single_atom_K"])
    for b in args.betas:
        s = luecking_suite(beta=b, depth=args.depth, seed=args.seed, n_measures=args.measures)
        w.writerow([b, f"{s.lo:.5g}", f"{s.hi:.5g}", f"{s.K:.4g}", f"{(8 * math.pi) ** b:.4g}"])


if __name__ == "__main__":
    main()
