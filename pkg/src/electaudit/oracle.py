"""Brute-force cross-checks for the closed-form audit probabilities.

Everything here recomputes a quantity the fast path gets analytically:
worst-case error allocations by construction, tail probabilities by subset
enumeration, q by iterative cap removal, stratified zero-detection chances as
exact hypergeometric products, and the protocol's risk guarantee by Monte
Carlo against an adversary that plants the worst-case taint. These are the
ground truth for the property tests and stay at desk scale on purpose.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .discrepancy import ErrorBoundVector, HandTally, WeightSpec
from .errors import Infeasible, TooLarge
from .exact import ceil_div
from .model import PooledContest
from .protocol import AlphaRule, AuditSession, EscalationRule, SamplingDesign, alpha_for_stage
from .tailprob import _u_vector, compute_q, pi_star_from_q

_ENUM_LIMIT = 10**6


@dataclass(frozen=True)
class SmallInstance:
    """A tail-probability instance small enough to enumerate every sample."""

    u: tuple[int, ...]
    w: WeightSpec
    M: int
    t: Fraction
    n: int

    def __post_init__(self):
        if not 1 <= len(self.u) <= 12:
            raise ValueError("instances must have 1..12 precincts")
        if not 1 <= self.n <= len(self.u):
            raise ValueError("need 1 <= n <= N")
        if any(x < 0 for x in self.u) or self.M < 0:
            raise ValueError("bounds and margin must be nonnegative")

    @property
    def N(self) -> int:
        return len(self.u)


def worst_case_allocation(t, u, w: WeightSpec, M: int) -> tuple[Fraction, ...]:
    """The error vector maximizing the number of precincts at or below t.

    Caps the q cheapest precincts at u_p min w_p^-1(t) and leaves the rest at
    u_p, with q from compute_q. The result sums to at least M; when even the
    bounds cannot reach M no allocation makes the outcome wrong and
    Infeasible is raised.
    """
    uu = _u_vector(u)
    if sum(uu) < M:
        raise Infeasible(f"total error bound {sum(uu)} cannot reach the margin {M}")
    q = compute_q(t, uu, w, M)
    capped = [min(Fraction(uu[p]), w.invert(p, t)) for p in range(len(uu))]
    order = sorted(range(len(uu)), key=lambda p: (uu[p] - capped[p], p))
    x = [Fraction(v) for v in uu]
    for p in order[:q]:
        x[p] = capped[p]
    assert sum(x) >= M
    return tuple(x)


def iterative_q(t, u, w: WeightSpec, M: int) -> int:
    """q by iterative cap removal rather than the sorted scan.

    Start with every precinct held at u_p min w_p^-1(t); while the total
    falls short of M, release the precinct that regains the most. The count
    still capped when the total first reaches M is q. Tie choices cannot
    change the total, so any release order gives the same q.
    """
    uu = _u_vector(u)
    if sum(uu) < M:
        return 0
    capped = {p: min(Fraction(uu[p]), w.invert(p, t)) for p in range(len(uu))}
    total = sum(capped.values())
    while total < M:
        j = max(capped, key=lambda p: (uu[p] - capped[p], p))
        total += uu[j] - capped.pop(j)
    return len(capped)


def lattice_max_clean(t, u, w: WeightSpec, M: int) -> int:
    """Max precincts with w_p(x_p) <= t over every integer x with sum >= M.

    Pure grid search, so it is the referee for the closed-form q. Only
    feasible for a handful of precincts with small bounds.
    """
    uu = _u_vector(u)
    points = 1
    for v in uu:
        points *= v + 1
    if points > 2 * 10**6:
        raise TooLarge(f"{points} lattice points")
    best = -1
    for x in itertools.product(*(range(v + 1) for v in uu)):
        if sum(x) < M:
            continue
        clean = sum(1 for p, xp in enumerate(x) if w.apply(p, xp) <= t)
        best = max(best, clean)
    if best < 0:
        raise Infeasible(f"no integer allocation within {uu} reaches {M}")
    return best


def exhaustive_pi_star(instance: SmallInstance) -> Fraction:
    """P(statistic <= t) under the worst-case allocation, by full enumeration.

    Counts the n-subsets whose every member is clean at level t. Exactly the
    quantity pi_star computes in closed form.
    """
    total = math.comb(instance.N, instance.n)
    if total > _ENUM_LIMIT:
        raise TooLarge(f"{total} samples to enumerate")
    try:
        x = worst_case_allocation(instance.t, instance.u, instance.w, instance.M)
    except Infeasible:
        return Fraction(0)
    clean = [instance.w.apply(p, x[p]) <= instance.t for p in range(instance.N)]
    hits = sum(
        1
        for sample in itertools.combinations(range(instance.N), instance.n)
        if all(clean[p] for p in sample)
    )
    return Fraction(hits, total)


def exact_stratified_zero_prob(
    k: Sequence[int], N: Sequence[int], n: Sequence[int]
) -> Fraction:
    """Chance that independent per-county samples all miss the taint.

    County c has N_c precincts of which k_c are untainted and draws n_c
    without replacement; the misses are independent across counties, so the
    answer is the product of hypergeometric zero terms C(k_c,n_c)/C(N_c,n_c).
    """
    if not len(k) == len(N) == len(n):
        raise ValueError("county vectors must align")
    out = Fraction(1)
    for k_c, N_c, n_c in zip(k, N, n):
        if not 0 <= k_c <= N_c or not 0 <= n_c <= N_c:
            raise ValueError("need 0 <= k_c <= N_c and 0 <= n_c <= N_c")
        if k_c < n_c:
            return Fraction(0)
        out *= Fraction(math.comb(k_c, n_c), math.comb(N_c, n_c))
    return out


# -- protocol risk ----------------------------------------------------------


def realize_overstatement(pooled: PooledContest, p: int, x_p: int) -> HandTally:
    """A hand tally for precinct p whose overstatement is exactly x_p.

    Deflates winners first (phantom winner votes), then inflates the
    smallest-reported loser; any excess over the precinct's vote cap comes
    out of the other losers, which costs nothing. Feasible for any
    0 <= x_p <= u_p with the default caps.
    """
    v = list(pooled.reported_row(p))
    if not 0 <= x_p:
        raise ValueError("overstatement must be nonnegative")
    a = v[:]
    need = x_p
    for k in sorted(pooled.winners, key=lambda k: -v[k]):
        take = min(a[k], need)
        a[k] -= take
        need -= take
    if need > 0:
        j = min(pooled.losers, key=lambda k: (v[k], k))
        a[j] += need
        surplus = sum(a) - pooled.r[p]
        for k in sorted(pooled.losers, key=lambda k: -a[k]):
            if surplus <= 0:
                break
            if k == j:
                continue
            cut = min(a[k], surplus)
            a[k] -= cut
            surplus -= cut
        if surplus > 0:
            raise Infeasible(f"overstatement {x_p} exceeds what precinct {p} can hold")
    return HandTally(
        pooled.precinct_ids[p], tuple(a), ceil_div(sum(a), pooled.f) if pooled.f else 0
    )


def worst_case_integer_adversary(
    pooled: PooledContest,
    u: ErrorBoundVector,
    w: WeightSpec,
    alpha1: Fraction,
    n1: int,
) -> tuple[int, ...]:
    """Integer taint that maximizes the chance the first stage confirms.

    Finds the largest clean-precinct count whose all-clean draw still
    confirms at level alpha1, then the largest integer-achievable statistic
    level t with q(t) within that budget, and plants the capped worst case:
    clean precincts carry floor(u_p min w^-1(t)) votes of error, the rest
    carry u_p. Floors can shave the total below M; clean precincts are then
    sacrificed (raised to u_p) until the outcome is wrong again.
    """
    uu = u.u
    N = pooled.N
    M = pooled.margin
    q_alpha = max(q for q in range(N + 1) if pi_star_from_q(q, n1, N) <= alpha1)
    levels = sorted({w.apply(p, z) for p in range(N) for z in range(uu[p] + 1)})
    if len(levels) > 500_000:
        raise TooLarge(f"{len(levels)} candidate statistic levels")
    # q(t) is nondecreasing in t, so binary search the largest usable level.
    lo = -1
    if compute_q(levels[0], uu, w, M) <= q_alpha:
        lo, hi = 0, len(levels) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if compute_q(levels[mid], uu, w, M) <= q_alpha:
                lo = mid
            else:
                hi = mid - 1
    t_star = levels[lo] if lo >= 0 else Fraction(0)
    q = compute_q(t_star, uu, w, M)
    capped = [min(Fraction(uu[p]), w.invert(p, t_star)) for p in range(N)]
    order = sorted(range(N), key=lambda p: (uu[p] - capped[p], p))
    x = list(uu)
    clean = order[:q]
    for p in clean:
        x[p] = math.floor(capped[p])
    for p in sorted(clean, key=lambda p: capped[p] - uu[p]):
        if sum(x) >= M:
            break
        x[p] = uu[p]
    assert sum(x) >= M, "bounds cannot express a wrong outcome"
    return tuple(x)


@dataclass(frozen=True)
class RiskReport:
    trials: int
    erroneous_confirmations: int
    rate: Fraction
    alpha: Fraction
    std_error: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.rate <= self.bound


def mc_protocol_risk(
    make_contest: Callable[[int], tuple[PooledContest, ErrorBoundVector, WeightSpec]],
    adversary: Callable[..., Sequence[int]],
    alpha,
    trials: int,
    *,
    initial_fraction: Fraction = Fraction(1, 5),
    alpha_rule: AlphaRule | None = None,
    escalation: EscalationRule | None = None,
    base_seed: int = 0,
) -> RiskReport:
    """Empirical chance the protocol confirms an outcome the taint made wrong.

    Each trial draws a contest, lets the adversary pick an error vector x,
    realizes hand tallies with exactly those overstatements, and runs the
    escalate-or-confirm protocol under a fresh seed. A confirmation counts as
    erroneous only when sum(x) >= M, i.e. when the planted errors suffice to
    change the outcome. The rate must stay within alpha plus three binomial
    standard errors; that is asserted, since this simulation is the referee
    for the protocol's guarantee.
    """
    alpha = Fraction(alpha)
    rule = alpha_rule or AlphaRule()
    esc = escalation or EscalationRule()
    alpha1 = alpha_for_stage(alpha, rule, 1)
    cache: dict[int, tuple[PooledContest, list[HandTally], bool]] = {}
    erroneous = 0
    for trial in range(trials):
        pooled, u, w = make_contest(trial)
        key = id(pooled)
        if key not in cache:
            n1 = max(1, math.ceil(pooled.N * initial_fraction))
            x = adversary(pooled, u, w, alpha1, n1)
            tallies = [realize_overstatement(pooled, p, x[p]) for p in range(pooled.N)]
            cache[key] = (pooled, tallies, sum(x) >= pooled.margin)
        pooled, tallies, outcome_wrong = cache[key]
        n1 = max(1, math.ceil(pooled.N * initial_fraction))
        session = AuditSession.create(
            session_id=f"{pooled.contest_id}:{base_seed + trial}",
            pooled=pooled,
            u=u,
            w=w,
            alpha=alpha,
            initial_n=n1,
            alpha_rule=rule,
            escalation=esc,
            design=SamplingDesign("simple", seed=base_seed + trial),
        )
        by_id = {t.precinct_id: t for t in tallies}
        while session.status == AuditSession.STATUS_OPEN:
            drawn = session.draw()
            session.record_tallies(by_id[pid] for pid in drawn)
            session.evaluate_stage()
        if session.status == AuditSession.STATUS_CONFIRMED and outcome_wrong:
            erroneous += 1
    rate = Fraction(erroneous, trials)
    se = math.sqrt(float(alpha) * float(1 - alpha) / trials)
    bound = float(alpha) + 3 * se
    report = RiskReport(
        trials=trials,
        erroneous_confirmations=erroneous,
        rate=rate,
        alpha=alpha,
        std_error=se,
        bound=bound,
    )
    assert report.ok, f"risk {float(rate):.4f} exceeds {bound:.4f}"
    return report
