#!/usr/bin/env python3
"""Best duality ratio found by the search at each depth, written as CSV.

Example:
    python3 scripts/sharpness_sweep.py --depths 2-8 --iters 10000 --restarts 8 --out sweep.csv
"""

import argparse
import csv
import time

from dyadic_duality.search import CEILING, STRATEGIES, SearchConfig, certify, search


def parse_depths(text):
    if "-" in text:
        a, b = map(int, text.split("-"))
        return list(range(a, b + 1))
    return [int(t) for t in text.split(",")]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depths", default="2-8")
    ap.add_argument("--iters", type=int, default=10_000)
    ap.add_argument("--restarts", type=int, default=8)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--strategies", default=",".join(STRATEGIES))
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="sharpness_sweep.csv")
    args = ap.parse_args()

    rows = []
    for strategy in args.strategies.split(","):
        prev = None
        for depth in parse_depths(args.depths):
            t0 = time.perf_counter()
            res = search(SearchConfig(depth, args.iters, args.seed, strategy, args.restarts), workers=args.workers)
            rep = certify(res)
            secs = time.perf_counter() - t0
            trend = "" if prev is None else ("up" if res.best_ratio > prev else "down")
            prev = res.best_ratio
            rows.append([strategy, depth, res.best_ratio, CEILING - res.best_ratio, rep.passed,
                         len(rep.info["tight_nodes"]), rep.info["near_tight_nodes"], secs])
            print(f"{strategy:18s} depth {depth}: {res.best_ratio:.10f} gap {CEILING - res.best_ratio:.3e} "
                  f"certified={rep.passed} {trend} ({secs:.1f}s)")

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["strategy", "depth", "best_ratio", "gap_to_ceiling", "certified",
                    "tight_nodes", "near_tight_nodes", "seconds"])
        for r in rows:
            w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in r])
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
