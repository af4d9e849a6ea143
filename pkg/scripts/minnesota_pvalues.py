#!/usr/bin/env python3
"""Audit sample P-values for the Minnesota 2006 U.S. Senate contest.

Run from the repository root:

    python3 scripts/minnesota_pvalues.py [--n 78 202]

Precinct-level returns for the 4123 precincts are not bundled, so the
grid starts from the published clean-precinct counts q: for each error
bound (the overstatement cap e+ or 40% of ballots), the count of
precincts whose capped error keeps a full hand count from changing the
outcome is known for the identity, per-opportunity, and thresholded
weightings.  From (q, n, N) alone the with- and without-replacement
bounds are exact rationals.
"""

from __future__ import annotations

import argparse

from electaudit.exact import decimal_string, percent_string
from electaudit.tailprob import pi_diamond_from_q, pi_star_from_q

N = 4123

# q by (bound, weighting); the two bounds differ far more than the weights do
Q_GRID = {
    ("e+", "identity"): 3993,
    ("e+", "per-opportunity"): 3995,
    ("e+", "thresholded"): 3993,
    ("40% of ballots", "identity"): 3402,
    ("40% of ballots", "per-opportunity"): 3403,
    ("40% of ballots", "thresholded"): 3402,
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[78, 202],
                    help="sample sizes to tabulate")
    args = ap.parse_args()

    header = f"{'bound':>16}  {'weighting':>16}  {'q':>5}"
    for n in args.n:
        header += f"  {'P* n=' + str(n):>14}  {'P<> n=' + str(n):>14}"
    print(header)
    for (bound, weight), q in Q_GRID.items():
        line = f"{bound:>16}  {weight:>16}  {q:>5}"
        for n in args.n:
            star = pi_star_from_q(q, n, N)
            diamond = pi_diamond_from_q(q, n, N)
            line += f"  {percent_string(star):>14}  {percent_string(diamond):>14}"
        print(line)

    print("\nP* is exact for simple random sampling without replacement;")
    print("P<> (the (q/N)^n form) also bounds proportional county allocations.")
    smallest = min(Q_GRID.values())
    n = max(args.n)
    print(f"tightest cell in full precision: P* = "
          f"{decimal_string(pi_star_from_q(smallest, n, N))} at q={smallest}, n={n}")


if __name__ == "__main__":
    main()
