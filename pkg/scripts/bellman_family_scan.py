#!/usr/bin/env python3
"""Scan the family B_A = sqrt(x) (A - y): constant ratio and condition margins versus A.

For each A on a grid in (mbar, A_max] the script records the ratio that the
family member would give and the worst margin of every Bellman condition.
Members with A < 2 mbar fail the mixed-derivative condition, which is why
the optimum of the ratio sits exactly at the boundary of feasibility.
"""

import argparse
import csv

import numpy as np

from dyadic_duality.bellman import CONDITIONS, family_candidate, family_ratio, optimize_family, verify_conditions


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mbar", type=float, default=1.0)
    ap.add_argument("--a-max", type=float, default=6.0)
    ap.add_argument("--points", type=int, default=51)
    ap.add_argument("--out", default="bellman_family_scan.csv")
    args = ap.parse_args()

    mbar = args.mbar
    A_opt, r_opt = optimize_family(mbar)
    print(f"mbar={mbar}: optimum A={A_opt!r}, ratio={r_opt!r} (closed form {2 * mbar!r}, {float(2 * np.sqrt(2 * mbar))!r})")

    As = np.linspace(mbar, args.a_max * mbar, args.points + 1)[1:]
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["A", "ratio", "passed", *CONDITIONS])
        for A in As:
            rep = verify_conditions(family_candidate(float(A), mbar))
            margins = [format(rep[c].worst_margin, ".17g") for c in CONDITIONS]
            w.writerow([format(A, ".17g"), format(family_ratio(float(A), mbar), ".17g"), rep.passed, *margins])
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
