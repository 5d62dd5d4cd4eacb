"""Growth of the maximal norm for dyadic-annulus data.

Prints one row per scale and the fitted exponent for each (s, p) pair, and
optionally writes the (k, log2 growth) plot data.

    python scripts/counterexample_sweep.py --p 4 --s 0 0.25 --out sweep.csv
"""

import argparse
import csv
import math

from schrolab.dyadic import sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ks", type=int, nargs="+", default=[2, 3, 4, 5, 6])
    ap.add_argument("--s", type=float, nargs="+", default=[0.0, 0.25])
    ap.add_argument("--p", type=float, default=4.0)
    ap.add_argument("--delta", type=float, default=0.5)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", help="CSV file for plot data")
    args = ap.parse_args()

    plot = []
    for s in args.s:
        res = sweep(args.ks, s, args.p, args.delta, workers=args.threads)
        print(f"s = {s}, p = {args.p}: expected slope {res.expected_slope:+.4f}")
        print(f"  {'k':>2} {'norm':>8} {'growth':>10} {'oracle':>10} {'gap':>8}")
        for r in res.rows:
            gap = abs(r.growth_value - r.oracle_value) / r.oracle_value
            print(f"  {r.k:>2} {r.norm:8.4f} {r.growth_value:10.5f} {r.oracle_value:10.5f} {gap:8.2%}")
            plot.append((s, args.p, r.k, math.log2(r.growth_value)))
        f = res.fit
        print(f"  fitted slope {f.fitted_slope:+.4f}, intercept {f.intercept:+.4f}, residual {f.residual:.2e}\n")

    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "p", "k", "log2_growth"])
            w.writerows(plot)


if __name__ == "__main__":
    main()
