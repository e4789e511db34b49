#!/usr/bin/env python3
"""Print output/input length ratios of every pass over inputs of length 2^4 .. 2^12."""

import argparse

from etrinv.ladder import FROZEN_RATIO_BOUNDS, LADDER_PASSES, format_rungs, measure, non_increasing


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("passes", nargs="*", default=list(LADDER_PASSES))
    args = ap.parse_args()
    for name in args.passes:
        rungs = measure(name)
        print("\n".join(format_rungs(name, rungs)))
        worst = max(r.ratio for r in rungs)
        print(f"{name}: max ratio {float(worst):.3f} (frozen bound {FROZEN_RATIO_BOUNDS[name]}), "
              f"{'non-increasing' if non_increasing(rungs) else 'INCREASING'}\n")


if __name__ == "__main__":
    main()
