"""Per-precinct discrepancies, worst-case error bounds, and weight families.

The audit measures, for each hand-counted precinct p, the overstatement

    e_p = sum over winners (reported - actual)_+  +  sum over losers (actual - reported)_+

at pseudo-candidate granularity. e_p is at least as large as the net margin
inflation the precinct's miscount could have produced, so if the total E over
all precincts is below the apparent margin M the reported winners are the
true winners.

Since unaudited precincts have unknown e_p, the audit relies on a priori
bounds u_p >= e_p. Three are provided:

* e_plus: r_p + (winner votes in p) - (smallest loser votes in p), valid
  whenever no more than r_p votes could actually have been cast in p;
* fraction: ceil(lambda * b_p), a policy cap assuming miscount cannot exceed
  a fixed fraction of the precinct's voting opportunities;
* supermajority: a sharpened bound for two-answer questions that must pass
  with at least 2/3 of the valid votes.

A weight family w_p turns e_p into the audit statistic max_p w_p(e_p):
identity counts raw votes, per_opportunity normalizes by precinct size, and
thresholded forgives up to m votes of benign error before normalizing.
Inversion w_p^-1(t) = sup{z : w_p(z) <= t} is what the tail bounds need.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Literal, Mapping, Sequence

from .errors import (
    BelowRange,
    EmptySample,
    NegativeCount,
    NoLosers,
    PrecinctMismatch,
)
from .exact import ceil_fraction, parse_ratio
from .model import PooledContest

WeightFamily = Literal["identity", "per_opportunity", "thresholded"]

SUPERMAJORITY_THRESHOLD = Fraction(2, 3)


@dataclass(frozen=True)
class HandTally:
    """Hand-count result for one precinct, aligned with PooledContest.pseudo.

    actual_votes[k] is the hand count for pseudo-candidate k (the undervote
    bucket's actual count lives at its pseudo index). actual_ballots is the
    number of ballots physically found. No accounting identity is required of
    hand counts: the reported ballot count is not inviolable.
    """

    precinct_id: str
    actual_votes: tuple[int, ...]
    actual_ballots: int

    def __post_init__(self):
        if any(v < 0 for v in self.actual_votes) or self.actual_ballots < 0:
            raise NegativeCount(f"hand tally for {self.precinct_id!r} has a negative count")

    @classmethod
    def from_real_counts(
        cls,
        pooled: PooledContest,
        precinct_id: str,
        votes: Sequence[int],
        undervotes: int,
        invalid_ballots: int,
        ballots: int,
    ) -> "HandTally":
        """Pool hand counts recorded per real candidate."""
        gm = pooled.group_map()
        actual = [0] * pooled.K
        for k, v in enumerate(votes):
            actual[gm[k]] += v
        actual[pooled.bucket_index] += undervotes + pooled.f * invalid_ballots
        return cls(precinct_id, tuple(actual), ballots)


def overstatement_rows(
    reported: Sequence[int],
    actual: Sequence[int],
    winners: Iterable[int],
    losers: Iterable[int],
) -> int:
    """e_p from one precinct's reported and actual pseudo-candidate counts."""
    e = 0
    for k in winners:
        d = reported[k] - actual[k]
        if d > 0:
            e += d
    for k in losers:
        d = actual[k] - reported[k]
        if d > 0:
            e += d
    return e


def overstatement(pooled: PooledContest, tally: HandTally) -> int:
    """e_p for a recorded hand tally; raises PrecinctMismatch for unknown precincts."""
    try:
        p = pooled.precinct_index(tally.precinct_id)
    except KeyError:
        raise PrecinctMismatch(f"precinct {tally.precinct_id!r} is not in the contest") from None
    if len(tally.actual_votes) != pooled.K:
        raise PrecinctMismatch(
            f"tally for {tally.precinct_id!r} has {len(tally.actual_votes)} entries "
            f"for {pooled.K} pseudo-candidates"
        )
    return overstatement_rows(pooled.reported_row(p), tally.actual_votes, pooled.winners, pooled.losers)


def total_overstatement(values: Iterable[int]) -> int:
    """E: the sum of per-precinct overstatements."""
    return sum(values)


def net_overstatement(
    reported_totals: Sequence[int],
    actual_totals: Sequence[int],
    winners: Iterable[int],
    losers: Iterable[int],
) -> int:
    """Margin inflation from contest-wide totals.

    Sum over winners of (reported - actual) plus sum over losers of
    (actual - reported), each term floored at zero. Never exceeds E; if it
    is below M the apparent winner set equals the actual winner set.
    """
    w = sum(max(reported_totals[k] - actual_totals[k], 0) for k in winners)
    l = sum(max(actual_totals[k] - reported_totals[k], 0) for k in losers)
    return w + l


def bound_e_plus(pooled: PooledContest, p: int, r_p: int | None = None) -> int:
    """Largest overstatement precinct p could hide, given at most r_p actual votes."""
    if not pooled.losers:
        raise NoLosers("e_plus needs at least one losing pseudo-candidate")
    if r_p is None:
        r_p = pooled.r[p]
    row = pooled.reported_row(p)
    return (
        r_p
        + sum(row[k] for k in pooled.winners)
        - min(row[k] for k in pooled.losers)
    )


def bound_fraction(pooled: PooledContest, p: int, lam) -> int:
    """Policy bound ceil(lambda * b_p); lambda parsed exactly (e.g. "0.4")."""
    lam = parse_ratio(lam)
    if not 0 <= lam <= 1:
        raise ValueError(f"bound fraction must be in [0, 1], got {lam}")
    return ceil_fraction(lam * pooled.b[p])


def bound_supermajority(v1p: int, v2p: int, r_p: int) -> int:
    """Sharpened per-precinct bound for a 2/3-supermajority question.

    v1p, v2p are the precinct's reported votes for the leading and trailing
    answers. Only the 2/3 threshold is supported; the algebra behind the
    sharpening is threshold-specific.
    """
    if min(v1p, v2p, r_p) < 0:
        raise NegativeCount("supermajority bound needs nonnegative counts")
    raw = ceil_fraction(SUPERMAJORITY_THRESHOLD * (r_p + Fraction(v1p, 2) - v2p))
    return max(raw, 0)


@dataclass(frozen=True)
class ErrorBoundVector:
    """Per-precinct bounds u_p >= e_p plus the method tag and caps r_p used."""

    u: tuple[int, ...]
    method: str
    r: tuple[int, ...]

    def __post_init__(self):
        if not self.u:
            raise ValueError("error bound vector cannot be empty")
        if len(self.u) != len(self.r):
            raise ValueError("u and r must have equal length")
        if any(x < 0 for x in self.u):
            raise NegativeCount("error bounds must be nonnegative")

    @property
    def N(self) -> int:
        return len(self.u)


def bounds_e_plus(pooled: PooledContest, r: Sequence[int] | None = None) -> ErrorBoundVector:
    r_used = tuple(r) if r is not None else pooled.r
    u = tuple(bound_e_plus(pooled, p, r_used[p]) for p in range(pooled.N))
    return ErrorBoundVector(u=u, method="e_plus", r=r_used)


def bounds_fraction(pooled: PooledContest, lam) -> ErrorBoundVector:
    lam = parse_ratio(lam)
    u = tuple(bound_fraction(pooled, p, lam) for p in range(pooled.N))
    return ErrorBoundVector(u=u, method=f"fraction({lam})", r=pooled.r)


def bounds_supermajority(pooled: PooledContest) -> ErrorBoundVector:
    """Per-precinct supermajority bounds for a two-answer pooled contest."""
    real_losers = [j for j in pooled.losers if not pooled.pseudo[j].includes_bucket]
    if len(pooled.winners) != 1 or len(real_losers) != 1:
        raise ValueError("supermajority bounds apply to one winner vs one trailing answer")
    win = pooled.winners[0]
    trail = real_losers[0]
    u = tuple(
        bound_supermajority(pooled.pseudo[win].votes[p], pooled.pseudo[trail].votes[p], pooled.r[p])
        for p in range(pooled.N)
    )
    return ErrorBoundVector(u=u, method="supermajority", r=pooled.r)


def custom_bounds(u: Sequence[int], r: Sequence[int] | None = None) -> ErrorBoundVector:
    r_used = tuple(r) if r is not None else tuple(u)
    return ErrorBoundVector(u=tuple(u), method="custom", r=r_used)


@dataclass(frozen=True)
class WeightSpec:
    """A monotone per-precinct weight family and its inverse.

    b is required for the families that normalize by precinct size; identity
    ignores it. m is the forgiveness parameter of the thresholded family.
    """

    family: WeightFamily
    m: int = 2
    b: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.family not in ("identity", "per_opportunity", "thresholded"):
            raise ValueError(f"unknown weight family {self.family!r}")
        if self.family != "identity":
            if self.b is None:
                raise ValueError(f"{self.family} weights need per-precinct opportunity counts")
            if any(x <= 0 for x in self.b):
                raise ValueError("opportunity counts must be positive")
        if self.m < 0:
            raise ValueError("threshold m must be nonnegative")

    @classmethod
    def identity(cls) -> "WeightSpec":
        return cls("identity")

    @classmethod
    def per_opportunity(cls, b: Sequence[int]) -> "WeightSpec":
        return cls("per_opportunity", b=tuple(b))

    @classmethod
    def thresholded(cls, b: Sequence[int], m: int = 2) -> "WeightSpec":
        return cls("thresholded", m=m, b=tuple(b))

    def label(self) -> str:
        if self.family == "identity":
            return "identity"
        if self.family == "per_opportunity":
            return "per-opportunity"
        return f"thresholded:{self.m}"

    def for_precincts(self, indices: Sequence[int]) -> "WeightSpec":
        """Restrict to a precinct subset (e.g. one county), reindexed in order."""
        if self.family == "identity":
            return self
        assert self.b is not None
        return WeightSpec(self.family, m=self.m, b=tuple(self.b[p] for p in indices))

    def apply(self, p: int, z) -> Fraction:
        z = Fraction(z)
        if self.family == "identity":
            return z
        assert self.b is not None
        if self.family == "per_opportunity":
            return z / self.b[p]
        over = z - self.m
        return over / self.b[p] if over > 0 else Fraction(0)

    def invert(self, p: int, t) -> Fraction:
        """w_p^-1(t) = sup{z : w_p(z) <= t}; errors below w_p(0) have no preimage."""
        t = Fraction(t)
        if t < 0:
            raise BelowRange(f"threshold {t} is below the weight of zero error")
        if self.family == "identity":
            return t
        assert self.b is not None
        if self.family == "per_opportunity":
            return t * self.b[p]
        return self.m + t * self.b[p]


def weight_apply(w: WeightSpec, p: int, z) -> Fraction:
    return w.apply(p, z)


def weight_invert(w: WeightSpec, p: int, t) -> Fraction:
    return w.invert(p, t)


def sample_statistic(w: WeightSpec, errors: Mapping[int, int]) -> Fraction:
    """max_p w_p(e_p) over the sampled precincts (keys are precinct indices)."""
    if not errors:
        raise EmptySample("statistic of an empty sample is undefined")
    return max(w.apply(p, e) for p, e in errors.items())
