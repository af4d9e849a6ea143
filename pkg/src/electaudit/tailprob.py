"""Exact worst-case tail probabilities for audit samples.

The null hypothesis is that the reported outcome is wrong, which requires the
total overstatement to reach the margin: sum_p x_p >= M for some error vector
x with 0 <= x_p <= u_p. The audit observes V = max over sampled p of
w_p(x_p) and asks: under the most unfavorable x consistent with a wrong
outcome, how likely is a sample this clean?

For a simple uniform sample of n of N precincts without replacement the
answer has a closed form. Let

    q(t) = the largest number of precincts that can simultaneously satisfy
           w_p(x_p) <= t while the rest carry their full bounds u_p and the
           total still reaches M.

Then the worst-case chance that all n sampled precincts show weight <= t is

    pi_star = C(q, n) / C(N, n)   (0 when q < n),

and the with-replacement / stratified relaxation is

    pi_diamond = (q / N) ** n.

Both are exact rationals here. q(t) itself is found by a sort: capping
precinct p at min(u_p, w_p^-1(t)) costs u_p - min(u_p, w_p^-1(t)) votes of
overstatement, so cap the cheapest precincts first and stop before the
reachable total drops below M. Ties are broken by ascending precinct index.

Stratified samples reuse pi_diamond through the smallest county sampling
fraction; fully independent per-county audits take the largest county
P-value against per-county margin thresholds floor(M * B_c / B).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .discrepancy import ErrorBoundVector, WeightSpec
from .errors import SampleTooLarge, ZeroSampleCounty
from .exact import floor_fraction


def _u_vector(u) -> tuple[int, ...]:
    if isinstance(u, ErrorBoundVector):
        return u.u
    return tuple(u)


def compute_q(t, u, w: WeightSpec, M: int) -> int:
    """Largest precinct count that can look clean (weight <= t) under a wrong outcome.

    Returns 0 when even zero clean precincts cannot reach the margin, i.e.
    sum(u) < M: the null is then infeasible outright.
    """
    uu = _u_vector(u)
    t = Fraction(t)
    N = len(uu)
    if N == 0:
        raise ValueError("need at least one precinct")
    capped = [min(Fraction(uu[p]), w.invert(p, t)) for p in range(N)]
    slack = [Fraction(uu[p]) - capped[p] for p in range(N)]
    order = sorted(range(N), key=lambda p: (slack[p], p))
    reachable = Fraction(sum(uu))
    if reachable < M:
        return 0
    q = 0
    for k, p in enumerate(order, start=1):
        reachable -= slack[p]
        if reachable >= M:
            q = k
        else:
            break
    return q


def pi_star_from_q(q: int, n: int, N: int) -> Fraction:
    """C(q, n) / C(N, n) as an exact rational product."""
    if not 1 <= n <= N:
        if n > N:
            raise SampleTooLarge(f"sample of {n} from {N} precincts")
        raise ValueError(f"sample size must be >= 1, got {n}")
    if q < n:
        return Fraction(0)
    out = Fraction(1)
    for i in range(n):
        out *= Fraction(q - i, N - i)
    return out


def pi_diamond_from_q(q: int, n: int, N: int) -> Fraction:
    """(q / N) ** n as an exact rational."""
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    if N < 1:
        raise ValueError("population must be nonempty")
    return Fraction(q, N) ** n


def pi_star(t, n: int, u, w: WeightSpec, M: int) -> Fraction:
    """Maximum P-value for a clean-looking uniform sample without replacement."""
    uu = _u_vector(u)
    return pi_star_from_q(compute_q(t, uu, w, M), n, len(uu))


def pi_diamond(t, n: int, u, w: WeightSpec, M: int) -> Fraction:
    """With-replacement relaxation of pi_star; also serves stratified samples."""
    uu = _u_vector(u)
    return pi_diamond_from_q(compute_q(t, uu, w, M), n, len(uu))


@dataclass(frozen=True)
class TailQuery:
    """One tail-probability evaluation: threshold, sample size, bounds, weights, margin."""

    t: Fraction
    n: int
    u: ErrorBoundVector
    w: WeightSpec
    M: int

    def __post_init__(self):
        if self.M < 0:
            raise ValueError("margin must be nonnegative")
        if not 0 <= self.n <= self.u.N:
            raise SampleTooLarge(f"sample of {self.n} from {self.u.N} precincts")


@dataclass(frozen=True)
class TailResult:
    p_value: Fraction
    q: int
    n: int
    N: int
    mode: str  # "without_replacement" | "with_replacement"


def evaluate_query(query: TailQuery, mode: str = "without_replacement") -> TailResult:
    q = compute_q(query.t, query.u, query.w, query.M)
    if mode == "without_replacement":
        p = pi_star_from_q(q, query.n, query.u.N)
    elif mode == "with_replacement":
        p = pi_diamond_from_q(q, query.n, query.u.N)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return TailResult(p_value=p, q=q, n=query.n, N=query.u.N, mode=mode)


def proportional_allocation(n_s: int, county_sizes: Sequence[int]) -> tuple[int, ...]:
    """Per-county sample sizes ceil(n_s * N_c / N), clipped to county size."""
    if n_s < 0:
        raise ValueError("sample size must be nonnegative")
    N = sum(county_sizes)
    if any(c < 1 for c in county_sizes) or N == 0:
        raise ValueError("county sizes must be positive")
    if n_s > N:
        raise SampleTooLarge(f"sample of {n_s} from {N} precincts")
    return tuple(min(-(-n_s * N_c // N), N_c) for N_c in county_sizes)


def min_fraction_sample_size(sample_sizes: Sequence[int], county_sizes: Sequence[int]) -> int:
    """floor(N * smallest county sampling fraction): the defensible overall size.

    For an allocation that exactly matches proportional_allocation(n_s) this
    recovers the largest such n_s.
    """
    if len(sample_sizes) != len(county_sizes):
        raise ValueError("sample and county size vectors must align")
    N = sum(county_sizes)
    frac = min(Fraction(n_c, N_c) for n_c, N_c in zip(sample_sizes, county_sizes))
    return floor_fraction(N * frac)


@dataclass(frozen=True)
class StratifiedResult:
    p_value: Fraction
    q: int
    n_eff: int
    N: int


def stratified_pvalue_proportional(
    t,
    sample_sizes: Sequence[int],
    county_sizes: Sequence[int],
    u,
    w: WeightSpec,
    M: int,
) -> StratifiedResult:
    """Conservative P-value for a county-stratified sample.

    Treats the data as an effective with-replacement sample of size
    n_eff = floor(N * min_c n_c / N_c). A county with precincts but no sample
    forces n_eff = 0 and P-value 1; that is reported with a ZeroSampleCounty
    warning rather than silently.
    """
    uu = _u_vector(u)
    N = sum(county_sizes)
    if len(uu) != N:
        raise ValueError("bounds must cover exactly the stratified population")
    for n_c, N_c in zip(sample_sizes, county_sizes):
        if not 0 <= n_c <= N_c:
            raise SampleTooLarge(f"county sample {n_c} of {N_c}")
    n_eff = min_fraction_sample_size(sample_sizes, county_sizes)
    q = compute_q(t, uu, w, M)
    if n_eff == 0:
        warnings.warn(
            "a county with precincts drew no sample; stratified bound degenerates to 1",
            ZeroSampleCounty,
        )
        return StratifiedResult(p_value=Fraction(1), q=q, n_eff=0, N=N)
    return StratifiedResult(p_value=pi_diamond_from_q(q, n_eff, N), q=q, n_eff=n_eff, N=N)


def county_margin_threshold(M: int, B_c: int, B: int) -> int:
    """floor(M * B_c / B): the county's share of the margin.

    If no county's overstatement reaches its share, the total cannot reach M,
    so testing each county against its threshold is a valid decomposition.
    """
    if M < 0 or B_c < 0 or B <= 0 or B_c > B:
        raise ValueError("need 0 <= B_c <= B, B > 0, M >= 0")
    return (M * B_c) // B


def per_county_pvalue(queries: Iterable[TailQuery]) -> Fraction:
    """Overall P-value for independent per-county audits: the worst county."""
    qs = list(queries)
    if not qs:
        raise ValueError("need at least one county query")
    return max(evaluate_query(qy).p_value for qy in qs)


def _argmin_sample_size(pvalue_at, alpha: Fraction, N: int) -> int:
    """Smallest n in [1, N] with pvalue_at(n) < alpha; N when none suffices.

    pvalue_at must be nonincreasing in n, so exponential growth followed by
    binary search needs O(log N) evaluations.
    """
    if pvalue_at(1) < alpha:
        return 1
    if not pvalue_at(N) < alpha:
        return N
    lo, hi = 1, 2
    while hi < N and not pvalue_at(hi) < alpha:
        lo, hi = hi, min(2 * hi, N)
    # invariant: p(lo) >= alpha, p(hi) < alpha
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pvalue_at(mid) < alpha:
            hi = mid
        else:
            lo = mid
    return hi


def initial_sample_size(
    t1,
    alpha1,
    u,
    w: WeightSpec,
    M: int,
    design: str = "simple",
    counties: Mapping[str, "CountyAuditSlice"] | None = None,
):
    """Smallest first-stage sample whose clean outcome (statistic <= t1) confirms.

    design "simple" searches pi_star, "proportional" searches pi_diamond (the
    stratified bound at an exact proportional allocation), and "per_county"
    returns a dict of per-county sizes, each searched against the county's
    margin share. Returns N (or the county size) when no smaller sample
    suffices; the caller can tell "full count confirms" from "nothing
    confirms" by evaluating the P-value at the returned size.
    """
    alpha1 = Fraction(alpha1)
    if design in ("simple", "proportional"):
        uu = _u_vector(u)
        N = len(uu)
        q = compute_q(t1, uu, w, M)
        if design == "simple":
            return _argmin_sample_size(lambda n: pi_star_from_q(q, n, N), alpha1, N)
        return _argmin_sample_size(lambda n: pi_diamond_from_q(q, n, N), alpha1, N)
    if design == "per_county":
        if not counties:
            raise ValueError("per_county design needs county slices")
        return {
            county: _argmin_sample_size(
                lambda n, s=s: pi_star(t1, n, s.u, s.w, s.M_c),
                alpha1,
                len(_u_vector(s.u)),
            )
            for county, s in counties.items()
        }
    raise ValueError(f"unknown design {design!r}")


@dataclass(frozen=True)
class CountyAuditSlice:
    """One county's share of a per-county audit: bounds, weights, margin share."""

    u: ErrorBoundVector
    w: WeightSpec
    M_c: int
