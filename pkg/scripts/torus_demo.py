#!/usr/bin/env python3
"""Compile the torus to ETR-INV with a test tower and check the point (6, 0, 0)."""

import argparse
import time
from fractions import Fraction

from etrinv.formula import failing_constraints
from etrinv.pipeline import pipeline
from etrinv.ranges import certify_instance
from etrinv.reductions import TowerMode

TORUS = "(x^2+y^2+z^2+24)^2 = 100*(x^2+y^2)"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--delta2", default="1/8")
    ap.add_argument("--height", type=int, default=3)
    args = ap.parse_args()
    started = time.perf_counter()
    res = pipeline(TORUS, "inv", Fraction(args.delta2), TowerMode.test(args.height), assume_compact=True)
    for rep in res.reports:
        print(f"{rep.stage:7s} in={rep.input_length:6d} out={rep.output_length:6d} "
              f"+vars={rep.new_vars:5d} {rep.seconds:.3f}s")
    for pt in ([6, 0, 0], [4, 0, 0], [0, 5, 1]):
        image = res.witness.apply(pt)
        bad = failing_constraints(res.instance, image)
        back = res.witness.invert(image)
        print(f"({', '.join(map(str, pt))}): {len(bad)} violated constraints, backward gives "
              f"({', '.join(map(str, back))})")
    cert = certify_instance(res.instance)
    print(f"certification: {'ok' if cert.ok else 'FAILED'} over {len(cert.variables)} variables")
    print(f"total {time.perf_counter() - started:.2f}s")


if __name__ == "__main__":
    main()
