#!/usr/bin/env python3
"""Monte Carlo check that the sequential protocol holds its risk limit.

Run from the repository root:

    python3 scripts/risk_simulation.py [--trials 2000] [--alpha 0.1] [--seed 0]

Each trial pits the escalation protocol against an adversary that plants
the cheapest outcome-changing set of integer errors consistent with the
per-precinct bounds, then counts how often a run terminates by wrongly
confirming the reported outcome.  The observed rate must stay within
three standard errors of the risk limit.
"""

from __future__ import annotations

import argparse
import random
import time

from electaudit.discrepancy import WeightSpec, bounds_e_plus
from electaudit.exact import parse_ratio, percent_string
from electaudit.model import Candidate, ContestSpec, Precinct, pool_losers, validate_contest
from electaudit.oracle import mc_protocol_risk, worst_case_integer_adversary


def synthetic_contest(N: int, seed: int):
    """Two-candidate contest with varied precinct sizes and a real margin."""
    rng = random.Random(seed)
    precincts = []
    for i in range(N):
        x = rng.randint(30, 90)
        y = rng.randint(10, x - 5)
        precincts.append(Precinct(f"p{i:02d}", "a", (x, y), 0, 0, x + y))
    spec = validate_contest(
        ContestSpec(
            contest_id=f"synthetic-{N}-{seed}",
            f=1,
            candidates=(Candidate("X"), Candidate("Y")),
            precincts=tuple(precincts),
        )
    )
    pooled = pool_losers(spec)
    return pooled, bounds_e_plus(pooled), WeightSpec.identity()


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--alpha", default="0.1", help="risk limit, exact decimal or ratio")
    ap.add_argument("--precincts", type=int, default=24)
    ap.add_argument("--seed", type=int, default=0, help="base seed; trial s uses seed+s")
    args = ap.parse_args()
    alpha = parse_ratio(args.alpha)

    bundle = synthetic_contest(args.precincts, 1234)
    pooled, _, _ = bundle
    print(f"contest: {pooled.N} precincts, margin {pooled.margin}, "
          f"risk limit {percent_string(alpha)}, {args.trials} trials")

    start = time.perf_counter()
    report = mc_protocol_risk(
        lambda trial: bundle,
        worst_case_integer_adversary,
        alpha,
        trials=args.trials,
        base_seed=args.seed,
    )
    elapsed = time.perf_counter() - start

    rate_pct = percent_string(report.rate) if report.rate else "0%"
    print(f"erroneous confirmations: {report.erroneous_confirmations}/{report.trials} "
          f"({rate_pct})")
    print(f"allowed (alpha + 3 std errors): {float(report.bound):.4f}")
    print(f"{'WITHIN' if report.ok else 'EXCEEDS'} the risk limit; "
          f"{elapsed:.1f}s, {1000 * elapsed / args.trials:.2f} ms/trial")


if __name__ == "__main__":
    main()
