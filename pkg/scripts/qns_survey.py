"""QNS constants of standard candidates on random balls in the disc and in catalog domains."""

import argparse
import csv
import math
import sys

import numpy as np

from carleson_lab import conformal_maps as cm
from carleson_lab.embedding_lab import HardyKernel
from carleson_lab.planar_domain import Domain
from carleson_lab.quasi_subharmonic import (
    QnsCandidate,
    analytic_power,
    constant,
    harmonic_mixture,
    power_stability,
    random_balls,
    spike,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--balls", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--power", type=float, default=2.0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    balls = random_balls(args.balls, seed=args.seed)
    c, r = balls[0]
    cands = [
        constant(1.0),
        harmonic_mixture(np.exp(2j * np.pi * rng.uniform(0, 1, 3)), rng.uniform(0.1, 1, 3), 0.1),
        analytic_power(HardyKernel(0.9 + 0j, 1.0), 1.0, "|kernel(0.9)|"),
        analytic_power(lambda z: z**3, 0.5, "|z^3|^0.5"),
        spike(c, r / 10),
    ]
    w = csv.writer(sys.stdout)
    w.writerow(["domain", "candidate", "C", f"C_power_{args.power}", "pi_C"])
    for u in cands:
        a, b = power_stability(u, args.power, None, balls)
        w.writerow(["disc", u.descriptor, f"{a:.5g}", f"{b:.5g}", f"{math.pi * a:.4f}"])
    for m in (cm.quadratic(0.5), cm.power_corner(1.5)):
        dom = Domain.from_map(m, 2048)
        dballs = random_balls(args.balls, seed=args.seed, domain=dom)
        u = QnsCandidate(lambda w: np.real(w) + 5.0, "Re(w)+5")
        a, b = power_stability(u, args.power, dom, dballs)
        w.writerow([m.tag, u.descriptor, f"{a:.5g}", f"{b:.5g}", f"{math.pi * a:.4f}"])


if __name__ == "__main__":
    main()
