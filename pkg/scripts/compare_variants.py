"""Median transition coverage and time-to-bug per variant on one target.

    python scripts/compare_variants.py mini_rtsp --trials 10 --max-execs 200000 --keep-going
"""

import argparse
import csv
import sys
import time

from statefuzz.engine import VARIANTS
from statefuzz.experiments import compare_variants, median


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("target")
    ap.add_argument("--variants", default=",".join(VARIANTS))
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--rng", type=int, default=0, help="rng seed of the first trial")
    ap.add_argument("--max-execs", type=int, default=200_000)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--keep-going", action="store_true", help="do not stop at the first crash")
    ap.add_argument("--enlarge-after", type=int, default=None)
    ap.add_argument("--csv", default=None, help="also write per-trial rows here")
    args = ap.parse_args(argv)

    overrides = {"max_executions": args.max_execs, "stop_on_crash": not args.keep_going}
    if args.enlarge_after is not None:
        overrides["enlarge_after"] = args.enlarge_after
    variants = args.variants.split(",")
    t0 = time.perf_counter()
    results = compare_variants(args.target, variants, args.trials, args.rng, args.jobs, **overrides)

    print(f"{'variant':<11} {'found':>6} {'med execs-to-bug':>17} {'med coverage':>13}")
    for v in variants:
        rs = results[v]
        found = sum(r.crashed for r in rs)
        print(f"{v:<11} {found:>3}/{len(rs):<2} {median(r.executions_to_bug for r in rs):>17g} "
              f"{median(r.transition_coverage for r in rs):>13g}")
    print(f"({time.perf_counter() - t0:.0f}s)", file=sys.stderr)

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["variant", "rng", "crashed", "executions_to_bug", "transition_coverage",
                        "features", "stt_nodes"])
            for v in variants:
                for r in results[v]:
                    w.writerow([v, r.rng_seed, int(r.crashed), r.executions_to_bug,
                                r.transition_coverage, r.features, r.stt_nodes])


if __name__ == "__main__":
    main()
