"""Contest data model: validation, apparent outcomes, and loser pooling.

A contest is audited at precinct granularity. Each precinct p reports votes
per candidate, undervotes, and invalid (e.g. overvoted) ballots; with f votes
allowed per ballot the precinct carries b_p = f * ballots voting
opportunities, and the accounting identity

    sum_k votes_kp + undervotes_p + f * invalid_p == b_p

must hold for reported data. Undervotes and f * invalid are combined into a
single "undervote bucket" pseudo-candidate. It can never win, it is always
treated as a loser when measuring discrepancies, and it is exempt from the
pooling cap below.

Pooling merges losing candidates into groups so the audit tracks fewer
pseudo-candidates. Any group of real candidates must total no more votes than
the runner-up, which keeps the apparent margin unchanged; the runner-up
itself always stays alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import Literal, Sequence

from .errors import (
    AccountingMismatch,
    EmptyContest,
    InfeasibleRule,
    NegativeCount,
    NotPassed,
)
from .exact import parse_ratio

CandidateKind = Literal["listed", "write-in"]
PoolingRule = Literal["maximize-min-group", "fewest-groups", "none"]

POOLING_RULES = ("maximize-min-group", "fewest-groups", "none")

# Sentinel used in partition bookkeeping for the undervote bucket.
_BUCKET = -1

# Exhaustive max-min partitioning is exponential; above this many poolable
# items the greedy heuristic takes over.
_EXHAUSTIVE_LIMIT = 8

BUCKET_NAME = "undervotes/invalid"


@dataclass(frozen=True)
class Candidate:
    name: str
    kind: CandidateKind = "listed"


@dataclass(frozen=True)
class Precinct:
    precinct_id: str
    county_id: str
    reported_votes: tuple[int, ...]
    reported_undervotes: int
    reported_invalid_ballots: int
    reported_ballots: int
    vote_cap: int | None = None  # r_p; defaults to b_p when absent


@dataclass(frozen=True)
class ContestSpec:
    contest_id: str
    f: int
    candidates: tuple[Candidate, ...]
    precincts: tuple[Precinct, ...]

    @property
    def N(self) -> int:
        return len(self.precincts)

    @property
    def C(self) -> int:
        return len(self.counties)

    @property
    def counties(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for pr in self.precincts:
            seen.setdefault(pr.county_id, None)
        return tuple(seen)

    def opportunities(self, p: int) -> int:
        """b_p: voting opportunities in precinct p."""
        return self.f * self.precincts[p].reported_ballots

    @property
    def b(self) -> tuple[int, ...]:
        return tuple(self.opportunities(p) for p in range(self.N))

    @property
    def B(self) -> int:
        return sum(self.b)

    def vote_cap(self, p: int) -> int:
        """r_p: upper bound on actual votes castable in precinct p (default b_p)."""
        cap = self.precincts[p].vote_cap
        return self.opportunities(p) if cap is None else cap

    @property
    def r(self) -> tuple[int, ...]:
        return tuple(self.vote_cap(p) for p in range(self.N))

    def totals(self) -> tuple[int, ...]:
        return tuple(
            sum(pr.reported_votes[k] for pr in self.precincts)
            for k in range(len(self.candidates))
        )

    def county_sizes(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for pr in self.precincts:
            out[pr.county_id] = out.get(pr.county_id, 0) + 1
        return out

    def county_opportunities(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for p, pr in enumerate(self.precincts):
            out[pr.county_id] = out.get(pr.county_id, 0) + self.opportunities(p)
        return out


def validate_contest(spec: ContestSpec) -> ContestSpec:
    """Check structural and accounting invariants; returns the contest unchanged.

    Raises EmptyContest, NegativeCount, or AccountingMismatch. Also rejects
    duplicate precinct ids and vote rows of the wrong width, which would break
    sampling and pooling silently.
    """
    if not spec.precincts or not spec.candidates:
        raise EmptyContest(f"contest {spec.contest_id!r} has no precincts or no candidates")
    if spec.f < 1:
        raise AccountingMismatch(f"votes allowed per ballot must be >= 1, got {spec.f}")
    seen: set[str] = set()
    for p, pr in enumerate(spec.precincts):
        if pr.precinct_id in seen:
            raise AccountingMismatch(f"duplicate precinct id {pr.precinct_id!r}")
        seen.add(pr.precinct_id)
        if len(pr.reported_votes) != len(spec.candidates):
            raise AccountingMismatch(
                f"precinct {pr.precinct_id!r} reports {len(pr.reported_votes)} vote "
                f"columns for {len(spec.candidates)} candidates"
            )
        fields = pr.reported_votes + (
            pr.reported_undervotes,
            pr.reported_invalid_ballots,
            pr.reported_ballots,
        )
        if any(v < 0 for v in fields):
            raise NegativeCount(f"precinct {pr.precinct_id!r} has a negative count")
        if pr.vote_cap is not None and pr.vote_cap < 0:
            raise NegativeCount(f"precinct {pr.precinct_id!r} has a negative vote cap")
        b_p = spec.f * pr.reported_ballots
        acc = sum(pr.reported_votes) + pr.reported_undervotes + spec.f * pr.reported_invalid_ballots
        if acc != b_p:
            raise AccountingMismatch(
                f"precinct {pr.precinct_id!r}: votes+undervotes+f*invalid = {acc} "
                f"but f*ballots = {b_p}"
            )
    return spec


@dataclass(frozen=True)
class Outcome:
    """Apparent (reported) outcome of a contest.

    winners/losers are indices into the candidate list the outcome was
    computed over. margin is the smallest winner total minus the largest loser
    total, zero when more than f candidates tie at the f-th total. An
    unopposed contest (no more candidates than winners) gets margin = the
    smallest winner total: the audit then degenerates to ballot accounting.
    """

    winners: tuple[int, ...]
    losers: tuple[int, ...]
    margin: int
    tied: bool
    unopposed: bool


def _outcome_from_totals(totals: Sequence[int], f: int) -> Outcome:
    order = sorted(range(len(totals)), key=lambda k: (-totals[k], k))
    if len(totals) <= f:
        return Outcome(tuple(order), (), min(totals), tied=False, unopposed=True)
    winners = tuple(order[:f])
    losers = tuple(order[f:])
    boundary = totals[order[f - 1]]
    tied = sum(1 for v in totals if v >= boundary) > f
    margin = 0 if tied else totals[order[f - 1]] - totals[order[f]]
    return Outcome(winners, losers, margin, tied=tied, unopposed=False)


@dataclass(frozen=True)
class PseudoCandidate:
    """One audited unit after pooling: a candidate, a group, or the bucket."""

    name: str
    members: tuple[int, ...]  # real-candidate indices; empty for the bare bucket
    includes_bucket: bool
    votes: tuple[int, ...]  # per precinct
    total: int


@dataclass(frozen=True)
class PooledContest:
    """Self-contained audited view of a contest.

    Carries everything downstream stages need: per-precinct reported votes per
    pseudo-candidate, opportunity counts b, vote caps r, the winner/loser
    split, and the apparent margin.
    """

    contest_id: str
    f: int
    rule: str
    precinct_ids: tuple[str, ...]
    county_ids: tuple[str, ...]
    b: tuple[int, ...]
    r: tuple[int, ...]
    pseudo: tuple[PseudoCandidate, ...]
    winners: tuple[int, ...]
    losers: tuple[int, ...]
    bucket_index: int
    bucket_exempt: bool
    margin: int
    runner_up_total: int
    tied: bool
    unopposed: bool

    @property
    def K(self) -> int:
        return len(self.pseudo)

    @property
    def N(self) -> int:
        return len(self.precinct_ids)

    @property
    def B(self) -> int:
        return sum(self.b)

    @property
    def counties(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for c in self.county_ids:
            seen.setdefault(c, None)
        return tuple(seen)

    def precinct_index(self, precinct_id: str) -> int:
        try:
            return self.precinct_ids.index(precinct_id)
        except ValueError:
            raise KeyError(precinct_id) from None

    def reported_row(self, p: int) -> tuple[int, ...]:
        return tuple(pc.votes[p] for pc in self.pseudo)

    def group_map(self) -> dict[int, int]:
        """Real-candidate index -> pseudo-candidate index."""
        out: dict[int, int] = {}
        for j, pc in enumerate(self.pseudo):
            for k in pc.members:
                out[k] = j
        return out

    def county_precincts(self) -> dict[str, list[int]]:
        out: dict[str, list[int]] = {}
        for p, c in enumerate(self.county_ids):
            out.setdefault(c, []).append(p)
        return out

    def county_opportunities(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for p, c in enumerate(self.county_ids):
            out[c] = out.get(c, 0) + self.b[p]
        return out


def apparent_outcome(contest: "ContestSpec | PooledContest") -> Outcome:
    """Apparent winners, losers, and margin from reported totals.

    For a ContestSpec the ranking is over real candidates. For a
    PooledContest it is over pseudo-candidates, excluding an exempt undervote
    bucket (which cannot win and may legitimately exceed the runner-up).
    Ties at the boundary are flagged and force margin 0, which makes the
    protocol escalate to a full count.
    """
    if isinstance(contest, PooledContest):
        idx = [j for j in range(contest.K) if not (contest.bucket_exempt and j == contest.bucket_index)]
        totals = [contest.pseudo[j].total for j in idx]
        raw = _outcome_from_totals(totals, contest.f)
        return Outcome(
            tuple(idx[k] for k in raw.winners),
            tuple(idx[k] for k in raw.losers),
            raw.margin,
            raw.tied,
            raw.unopposed,
        )
    return _outcome_from_totals(contest.totals(), contest.f)


def _partition_exhaustive(values: Sequence[int], cap: int, rule: str) -> list[list[int]]:
    """Best partition of item indices under the cap, by exhaustive search.

    maximize-min-group: maximize the smallest group total (ties: fewer groups,
    then the canonical first enumeration). fewest-groups: minimize the number
    of groups (ties: larger smallest group, then first enumeration).
    """
    n = len(values)
    best: list[list[int]] | None = None
    best_key: tuple | None = None

    def extend(i: int, groups: list[list[int]], sums: list[int]):
        nonlocal best, best_key
        if i == n:
            if rule == "maximize-min-group":
                key = (min(sums), -len(groups))
            else:
                key = (-len(groups), min(sums))
            if best_key is None or key > best_key:
                best_key = key
                best = [list(g) for g in groups]
            return
        for gi in range(len(groups)):
            if sums[gi] + values[i] <= cap:
                groups[gi].append(i)
                sums[gi] += values[i]
                extend(i + 1, groups, sums)
                groups[gi].pop()
                sums[gi] -= values[i]
        groups.append([i])
        sums.append(values[i])
        extend(i + 1, groups, sums)
        groups.pop()
        sums.pop()

    extend(0, [], [])
    if best is None:
        raise InfeasibleRule("no partition satisfies the group cap")
    return best


def _partition_greedy(values: Sequence[int], cap: int, rule: str) -> list[list[int]]:
    order = sorted(range(len(values)), key=lambda i: (-values[i], i))
    if rule == "fewest-groups":
        # First-fit decreasing.
        groups: list[list[int]] = []
        sums: list[int] = []
        for i in order:
            for gi in range(len(groups)):
                if sums[gi] + values[i] <= cap:
                    groups[gi].append(i)
                    sums[gi] += values[i]
                    break
            else:
                groups.append([i])
                sums.append(values[i])
        return groups
    # maximize-min-group: longest-processing-time into the fewest feasible
    # group count, growing the count until the cap holds.
    total = sum(values)
    start = 1 if cap <= 0 or total == 0 else max(1, -(-total // cap))
    for g in range(start, len(values) + 1):
        groups = [[] for _ in range(g)]
        sums = [0] * g
        for i in order:
            gi = min(range(g), key=lambda j: (sums[j], j))
            groups[gi].append(i)
            sums[gi] += values[i]
        if max(sums) <= cap:
            return [grp for grp in groups if grp]
    return [[i] for i in range(len(values))]


def _partition(values: Sequence[int], cap: int, rule: str) -> list[list[int]]:
    if not values:
        return []
    if any(v > cap for v in values):
        raise InfeasibleRule("an item alone exceeds the group cap")
    if len(values) <= _EXHAUSTIVE_LIMIT:
        return _partition_exhaustive(values, cap, rule)
    return _partition_greedy(values, cap, rule)


def pool_losers(spec: ContestSpec, rule: PoolingRule = "maximize-min-group") -> PooledContest:
    """Build the audited pseudo-candidate view of a validated contest.

    Winners and the runner-up always stay as their own pseudo-candidates.
    Remaining losers are grouped under the cap (group total <= runner-up
    total) according to the rule; "none" keeps every candidate separate. The
    undervote bucket participates in grouping only when its own total fits
    under the cap; otherwise it stays a separate exempt pseudo-candidate.
    Should a rule ever fail to produce a valid grouping it falls back to
    "none" rather than erroring.
    """
    if rule not in POOLING_RULES:
        raise ValueError(f"unknown pooling rule {rule!r}")
    outcome = apparent_outcome(spec)
    totals = spec.totals()
    N = spec.N
    bucket_votes = tuple(
        pr.reported_undervotes + spec.f * pr.reported_invalid_ballots for pr in spec.precincts
    )
    bucket_total = sum(bucket_votes)

    runner_up_total = totals[outcome.losers[0]] if outcome.losers else 0
    cap = runner_up_total
    fixed_losers = [k for k in outcome.losers if totals[k] == runner_up_total]
    poolable = [k for k in outcome.losers if totals[k] < runner_up_total]

    def build(groups: list[list[int]], bucket_in_partition: bool) -> PooledContest:
        # groups contain positions into `items`; translate back to candidate
        # indices / bucket sentinel.
        pseudo: list[PseudoCandidate] = []
        for k in outcome.winners:
            pseudo.append(
                PseudoCandidate(
                    name=spec.candidates[k].name,
                    members=(k,),
                    includes_bucket=False,
                    votes=tuple(pr.reported_votes[k] for pr in spec.precincts),
                    total=totals[k],
                )
            )
        loser_pseudo: list[PseudoCandidate] = []
        for k in fixed_losers:
            loser_pseudo.append(
                PseudoCandidate(
                    name=spec.candidates[k].name,
                    members=(k,),
                    includes_bucket=False,
                    votes=tuple(pr.reported_votes[k] for pr in spec.precincts),
                    total=totals[k],
                )
            )
        for group in groups:
            members = tuple(sorted(m for m in group if m != _BUCKET))
            includes_bucket = _BUCKET in group
            votes = [0] * N
            for k in members:
                for p, pr in enumerate(spec.precincts):
                    votes[p] += pr.reported_votes[k]
            if includes_bucket:
                for p in range(N):
                    votes[p] += bucket_votes[p]
            names = [spec.candidates[k].name for k in members]
            if includes_bucket:
                names.append(BUCKET_NAME)
            loser_pseudo.append(
                PseudoCandidate(
                    name="+".join(names),
                    members=members,
                    includes_bucket=includes_bucket,
                    votes=tuple(votes),
                    total=sum(votes),
                )
            )
        loser_pseudo.sort(key=lambda pc: (-pc.total, pc.name))
        bucket_exempt = not bucket_in_partition
        if bucket_exempt:
            loser_pseudo.append(
                PseudoCandidate(
                    name=BUCKET_NAME,
                    members=(),
                    includes_bucket=True,
                    votes=bucket_votes,
                    total=bucket_total,
                )
            )
        pseudo.extend(loser_pseudo)
        bucket_index = next(j for j, pc in enumerate(pseudo) if pc.includes_bucket)
        return PooledContest(
            contest_id=spec.contest_id,
            f=spec.f,
            rule=rule,
            precinct_ids=tuple(pr.precinct_id for pr in spec.precincts),
            county_ids=tuple(pr.county_id for pr in spec.precincts),
            b=spec.b,
            r=spec.r,
            pseudo=tuple(pseudo),
            winners=tuple(range(len(outcome.winners))),
            losers=tuple(range(len(outcome.winners), len(pseudo))),
            bucket_index=bucket_index,
            bucket_exempt=bucket_exempt,
            margin=outcome.margin,
            runner_up_total=runner_up_total,
            tied=outcome.tied,
            unopposed=outcome.unopposed,
        )

    if rule == "none" or not outcome.losers:
        return build([[m] for m in poolable], bucket_in_partition=False)

    items: list[int] = list(poolable)
    bucket_poolable = bucket_total <= cap
    if bucket_poolable:
        items.append(_BUCKET)
    values = [bucket_total if m == _BUCKET else totals[m] for m in items]
    try:
        groups_ix = _partition(values, cap, rule)
    except InfeasibleRule:
        return build([[m] for m in poolable], bucket_in_partition=False)
    groups = [[items[i] for i in grp] for grp in groups_ix]
    return build(groups, bucket_in_partition=bucket_poolable)


def supermajority_margin(v_yes: int, v_no: int, threshold) -> int:
    """Votes of overstatement that could overturn a passed supermajority question.

    threshold is the required fraction of valid votes, strictly between 1/2
    and 1 (e.g. "2/3"). Raises NotPassed when the question did not reach the
    threshold, since then there is no apparent outcome to confirm.
    """
    if v_yes < 0 or v_no < 0:
        raise NegativeCount("vote totals must be nonnegative")
    theta = parse_ratio(threshold)
    if not (Fraction(1, 2) < theta < 1):
        raise ValueError(f"threshold must be in (1/2, 1), got {theta}")
    total = v_yes + v_no
    if Fraction(v_yes) < theta * total:
        raise NotPassed(
            f"yes votes {v_yes} fall short of {theta} of {total}; nothing to audit"
        )
    return floor(Fraction(v_yes) - theta * total)
