#!/usr/bin/env python3
"""Regenerate tests/fixtures/oracle_cases.jsonl from the brute-force oracle.

Run from the repository root:

    python3 scripts/regen_oracle_fixtures.py

The fixture file freezes oracle outputs for a seeded stream of random
instances: the clean-precinct count q from the iterative release
algorithm, the worst-case error allocation, and the tail probability
obtained by enumerating every possible sample subset. The closed-form
implementations are tested against these frozen values, so a regression
on either side shows up as a fixture diff or a test failure.

Record kinds:
  full    small instances (N <= 9) with the worst-case allocation and
          the subset-enumeration tail probability frozen alongside q;
          when the instance also has integer weight levels and a tiny
          lattice, the exhaustive lattice clean count is frozen too.
  q-only  larger instances (N <= 40) freezing just the iterative q.
"""

from __future__ import annotations

import json
import random
from fractions import Fraction
from pathlib import Path

from electaudit.discrepancy import WeightSpec
from electaudit.errors import Infeasible, TooLarge
from electaudit.oracle import (
    SmallInstance,
    exhaustive_pi_star,
    iterative_q,
    lattice_max_clean,
    worst_case_allocation,
)

SEED = 170_001
FULL_CASES = 240
LATTICE_CASES = 60
Q_ONLY_CASES = 1_050
OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "oracle_cases.jsonl"

FAMILIES = ("identity", "per_opportunity", "thresholded")


def make_weight(family: str, b: list[int]) -> WeightSpec:
    if family == "identity":
        return WeightSpec.identity()
    if family == "per_opportunity":
        return WeightSpec.per_opportunity(b)
    return WeightSpec.thresholded(b, m=2)


def draw_threshold(rng: random.Random, w: WeightSpec, u: list[int]) -> Fraction:
    """Pick t at, between, or beyond the achievable statistic levels."""
    top = max(u) if u else 0
    roll = rng.random()
    if roll < 0.15:
        return Fraction(0)
    p = rng.randrange(len(u))
    z = rng.randint(0, max(top, 1))
    level = w.apply(p, z)
    if roll < 0.60:
        return level
    if roll < 0.85:
        return level + Fraction(1, rng.randint(2, 9))
    return Fraction(rng.randint(0, 3 * max(top, 1)), rng.randint(1, 50))


def draw_instance(rng: random.Random, max_n: int) -> dict:
    N = rng.randint(1, max_n)
    b = [rng.randint(1, 48) for _ in range(N)]
    u = [rng.randint(0, 24) if rng.random() > 0.1 else 0 for _ in range(N)]
    family = rng.choice(FAMILIES)
    M = rng.randint(1, sum(u) + 3)
    t = draw_threshold(rng, make_weight(family, b), u)
    return {"u": u, "b": b, "family": family, "M": M, "t": str(t)}


def full_record(case: int, inst: dict, rng: random.Random) -> dict:
    u, b, M = inst["u"], inst["b"], inst["M"]
    t = Fraction(inst["t"])
    w = make_weight(inst["family"], b)
    n = rng.randint(1, len(u))

    q = iterative_q(t, u, w, M)
    try:
        alloc = [str(x) for x in worst_case_allocation(t, u, w, M)]
    except Infeasible:
        alloc = None
    pi = str(exhaustive_pi_star(SmallInstance(tuple(u), w, M, t, n)))

    lattice = None
    if inst["family"] == "identity" and t.denominator == 1 and len(u) <= 4:
        try:
            lattice = lattice_max_clean(t, u, w, M)
        except (TooLarge, Infeasible):
            lattice = None

    return {
        "kind": "full",
        "case": case,
        **inst,
        "n": n,
        "q": q,
        "worst_case": alloc,
        "pi_star": pi,
        "lattice_q": lattice,
    }


def q_only_record(case: int, inst: dict) -> dict:
    u, b, M = inst["u"], inst["b"], inst["M"]
    w = make_weight(inst["family"], b)
    q = iterative_q(Fraction(inst["t"]), u, w, M)
    return {"kind": "q-only", "case": case, **inst, "q": q}


def lattice_instance(rng: random.Random) -> dict:
    """Identity weights, integer threshold, N <= 4: small enough that
    enumerating every integer error allocation is feasible and the
    continuous optimum is attained at integer points."""
    N = rng.randint(1, 4)
    b = [rng.randint(1, 12) for _ in range(N)]
    u = [rng.randint(0, 8) for _ in range(N)]
    M = rng.randint(1, sum(u) + 2)
    t = rng.randint(0, max(u) if u else 0)
    return {"u": u, "b": b, "family": "identity", "M": M, "t": str(Fraction(t))}


def main() -> None:
    rng = random.Random(SEED)
    records = []
    for case in range(FULL_CASES):
        records.append(full_record(case, draw_instance(rng, max_n=9), rng))
    for case in range(LATTICE_CASES):
        records.append(full_record(FULL_CASES + case, lattice_instance(rng), rng))
    base = FULL_CASES + LATTICE_CASES
    for case in range(Q_ONLY_CASES):
        records.append(q_only_record(base + case, draw_instance(rng, max_n=40)))

    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    print(f"wrote {len(records)} records to {OUT}")


if __name__ == "__main__":
    main()
