#!/usr/bin/env python3
"""Walk the Sausalito 2006 school board contest end to end.

Run from the repository root:

    python3 scripts/sausalito_demo.py [--seed 9] [--alpha 0.1]

Prints the apparent outcome, the per-precinct error bounds under both
loser poolings, the single-stage P-value as the audit grows from one
precinct to a census, and a full seeded audit session in which every
hand count matches the reported returns.
"""

from __future__ import annotations

import argparse
from fractions import Fraction
from pathlib import Path

from electaudit.contest_io import load_contest
from electaudit.discrepancy import HandTally, WeightSpec, bound_e_plus, bounds_e_plus
from electaudit.exact import parse_ratio, percent_string
from electaudit.model import pool_losers
from electaudit.protocol import AuditSession, SamplingDesign
from electaudit.tailprob import initial_sample_size, pi_star

DATA = Path(__file__).resolve().parent.parent / "data" / "sausalito_2006.json"


def clean_tally(pooled, pid):
    p = pooled.precinct_index(pid)
    row = pooled.reported_row(p)
    return HandTally(pid, row, -(-sum(row) // pooled.f))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=9, help="public draw seed")
    ap.add_argument("--alpha", default="0.1", help="risk limit, exact decimal or ratio")
    ap.add_argument("--threshold", default="0.002", help="escalation threshold t")
    args = ap.parse_args()
    alpha = parse_ratio(args.alpha)
    t = parse_ratio(args.threshold)

    spec = load_contest(DATA)
    flat = pool_losers(spec, "none")
    grouped = pool_losers(spec)

    print(f"contest {spec.contest_id}: {grouped.N} precincts, {spec.B} ballots, f={spec.f}")
    winners = ", ".join(grouped.pseudo[k].name for k in grouped.winners)
    print(f"apparent winners: {winners}   margin M = {grouped.margin}\n")

    print("per-precinct overstatement bounds")
    print(f"{'precinct':>8}  {'e+ (write-ins pooled)':>22}  {'e+ (min loser pooled)':>22}")
    for pr in spec.precincts:
        a = bound_e_plus(flat, flat.precinct_index(pr.precinct_id))
        b = bound_e_plus(grouped, grouped.precinct_index(pr.precinct_id))
        print(f"{pr.precinct_id:>8}  {a:>22}  {b:>22}")

    u = bounds_e_plus(grouped)
    w = WeightSpec.per_opportunity(grouped.b)
    print(f"\nmax P-value for a clean sample at t = {t} (weighted by opportunities)")
    for n in range(1, grouped.N + 1):
        p = pi_star(t, n, u, w, grouped.margin)
        print(f"  n = {n}: P = {p} ({percent_string(p)})")
    n1 = initial_sample_size(t, Fraction(1, 100), u, w, grouped.margin)
    print(f"confirming at alpha = 1/100 would need n1 = {n1} of {grouped.N}\n")

    sess = AuditSession.create(
        session_id=f"{spec.contest_id}:{args.seed}",
        pooled=grouped,
        u=u,
        w=w,
        alpha=alpha,
        initial_n=1,
        design=SamplingDesign("simple", args.seed),
    )
    while sess.status == "open":
        for pid in sess.draw():
            sess.record_tallies([clean_tally(grouped, pid)])
        sess.evaluate_stage()
    print(sess.report_text())


if __name__ == "__main__":
    main()
