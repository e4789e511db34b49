#!/usr/bin/env python3
"""Compare the interval bound for degree-2 rational functions with a grid scan."""

import argparse
import random
from fractions import Fraction

from etrinv.oracle import empirical_range
from etrinv.ranges import bound_rational


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--grid", type=int, default=41)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    for delta in (Fraction(1, 4), Fraction(1, 16), Fraction(1, 256)):
        violations = 0
        slack = Fraction(0)
        for _ in range(args.trials):
            a = [Fraction(rng.randint(-8, 8), rng.randint(1, 4)) for _ in range(6)]
            b = [Fraction(rng.randint(-1, 1), rng.randint(1, 4)) for _ in range(5)] + [Fraction(rng.randint(2, 5))]
            seen = empirical_range(a, b, delta, args.grid)
            bound = bound_rational(a, b, delta)
            if not seen.within(bound):
                violations += 1
            slack = max(slack, (bound.width - seen.width) / delta)
        print(f"δ={delta}: {violations} violations in {args.trials} trials, "
              f"worst overestimate {float(slack):.2f}·δ")


if __name__ == "__main__":
    main()
