"""The sequential escalate-or-confirm audit protocol.

An audit session walks stages s = 1, 2, ... Each stage s has an error budget
alpha_s with sum_s alpha_s <= alpha, draws additional precincts so the
cumulative sample has n_s of the N precincts, hand-counts them, and computes
the worst-case P-value of the observed statistic. If p <= alpha_s the
apparent outcome is confirmed and the audit stops; otherwise the sample
escalates, ultimately to a full hand count whose result stands on its own.
Whatever the true error vector is, the chance of confirming a wrong outcome
is at most sum_s alpha_s <= alpha.

Draws must be publicly verifiable, so randomness comes from a counter-mode
SHA-256 generator keyed by (seed, contest id, stage [, county]): anyone can
replay the selection from the published seed. Uniform integers use rejection
sampling (no modulo bias) and without-replacement selection is a partial
Fisher-Yates shuffle over the precinct ids in sorted order, which makes the
draw independent of ingestion order. Test vectors live in the package README.

Sessions are event-sourced: every mutation appends to an event log, the log's
hash is embedded on save, and saving is atomic (write temp file, rename).
Sessions carry no wall-clock timestamps so that identical inputs yield
byte-identical session files and reports.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import tailprob
from .discrepancy import (
    ErrorBoundVector,
    HandTally,
    WeightSpec,
    overstatement,
    sample_statistic,
)
from .errors import (
    AlreadyComplete,
    DuplicateTally,
    ExhaustedPopulation,
    MissingTallies,
    NotInSample,
    SampleTooLarge,
    SessionIntegrity,
    StageBeyondS,
)
from .exact import ceil_fraction, parse_ratio, ratio_from_json, ratio_json
from .model import PooledContest, PseudoCandidate

SESSION_SCHEMA = "audit-session/1"
REPORT_SCHEMA = "audit-report/1"

# Reported caps r_p assume the reported ballot count limits actual votes; a
# precinct can in reality hold more ballots than reported, which no bound
# method detects. Reports carry this caveat verbatim.
CAP_CAVEAT = (
    "Error bounds assume each precinct's actual votes cannot exceed its cap r_p "
    "(default: reported voting opportunities). Ballot accounting that makes the "
    "cap trustworthy is a prerequisite, not a product, of this audit."
)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


class VerifiableRng:
    """Counter-mode SHA-256 generator over a published key string.

    Block i is SHA-256(key || "#" || i), consumed as a 256-bit big-endian
    integer. randbelow(n) rejects blocks >= floor(2^256 / n) * n, so results
    are exactly uniform.
    """

    BITS = 256

    def __init__(self, key: str):
        self.key = key
        self.counter = 0

    def _block(self) -> int:
        h = hashlib.sha256(f"{self.key}#{self.counter}".encode()).digest()
        self.counter += 1
        return int.from_bytes(h, "big")

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randbelow needs a positive bound")
        span = 1 << self.BITS
        limit = span - (span % n)
        while True:
            x = self._block()
            if x < limit:
                return x % n


def draw_key(seed: int, contest_id: str, stage: int, county: str | None = None) -> str:
    scope = county if county is not None else "all"
    return f"{seed}|{contest_id}|stage:{stage}|{scope}"


def select_without_replacement(population: Sequence[str], k: int, rng: VerifiableRng) -> list[str]:
    """First k entries of a Fisher-Yates shuffle; order of selection is kept."""
    if k > len(population):
        raise ExhaustedPopulation(f"asked for {k} of {len(population)}")
    arr = list(population)
    for i in range(k):
        j = i + rng.randbelow(len(arr) - i)
        arr[i], arr[j] = arr[j], arr[i]
    return arr[:k]


@dataclass(frozen=True)
class SamplingDesign:
    kind: str  # "simple" | "stratified_proportional" | "per_county"
    seed: int

    def __post_init__(self):
        if self.kind not in ("simple", "stratified_proportional", "per_county"):
            raise ValueError(f"unknown sampling design {self.kind!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


@dataclass(frozen=True)
class AlphaRule:
    """Stage error budgets: halving spends alpha/2^s, fixed_s spends alpha/S."""

    kind: str = "halving"
    stages: int | None = None

    def __post_init__(self):
        if self.kind not in ("halving", "fixed_s"):
            raise ValueError(f"unknown alpha rule {self.kind!r}")
        if self.kind == "fixed_s" and (self.stages is None or self.stages < 1):
            raise ValueError("fixed_s needs a positive stage count")


def alpha_for_stage(alpha, rule: AlphaRule, s: int) -> Fraction:
    """The stage-s budget alpha_s; budgets sum to <= alpha over all stages."""
    alpha = Fraction(alpha)
    if not 0 <= alpha < 1:
        raise ValueError("alpha must be in [0, 1)")
    if s < 1:
        raise ValueError("stages are numbered from 1")
    if rule.kind == "halving":
        return alpha / 2**s
    assert rule.stages is not None
    if s > rule.stages:
        raise StageBeyondS(f"stage {s} exceeds the fixed schedule of {rule.stages}")
    return alpha / rule.stages


@dataclass(frozen=True)
class EscalationRule:
    """How the cumulative sample grows when a stage fails to confirm.

    fixed_increment adds `increment` precincts (default ceil(0.02 N));
    minimal_confirming jumps to the smallest size that would confirm if the
    statistic stayed at its current value.
    """

    kind: str = "minimal_confirming"
    increment: int | None = None

    def __post_init__(self):
        if self.kind not in ("fixed_increment", "minimal_confirming"):
            raise ValueError(f"unknown escalation rule {self.kind!r}")
        if self.increment is not None and self.increment < 1:
            raise ValueError("increment must be positive")


def default_increment(N: int) -> int:
    return ceil_fraction(Fraction(2 * N, 100))


def next_sample_size(
    rule: EscalationRule,
    n_prev: int,
    N: int,
    alpha_next: Fraction,
    pvalue_at,
) -> int:
    """Cumulative size for the next stage: strictly larger, capped at N.

    pvalue_at(n) must be the stage P-value if the statistic keeps its current
    value, nonincreasing in n.
    """
    if n_prev >= N:
        raise ExhaustedPopulation("the whole population is already sampled")
    if rule.kind == "fixed_increment":
        inc = rule.increment if rule.increment is not None else default_increment(N)
        return min(N, n_prev + inc)
    target = tailprob._argmin_sample_size(pvalue_at, alpha_next, N)
    return min(N, max(n_prev + 1, target))


def _county_indices(pooled: PooledContest) -> dict[str, list[int]]:
    return pooled.county_precincts()


@dataclass
class StageRecord:
    stage: int
    n: int
    alpha_s: Fraction
    statistic: Fraction | None
    p_value: Fraction | None
    decision: str
    detail: dict

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "n": self.n,
            "alpha_s": ratio_json(self.alpha_s),
            "statistic": None if self.statistic is None else ratio_json(self.statistic),
            "p_value": None if self.p_value is None else ratio_json(self.p_value),
            "decision": self.decision,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StageRecord":
        return cls(
            stage=d["stage"],
            n=d["n"],
            alpha_s=ratio_from_json(d["alpha_s"]),
            statistic=None if d["statistic"] is None else ratio_from_json(d["statistic"]),
            p_value=None if d["p_value"] is None else ratio_from_json(d["p_value"]),
            decision=d["decision"],
            detail=d["detail"],
        )


class AuditSession:
    """Mutable audit state machine over a pooled contest.

    Construction happens through `create` (new audits) or `from_dict`
    (persistence). All mutations append events; `event_log_hash` commits to
    the full history.
    """

    STATUS_OPEN = "open"
    STATUS_CONFIRMED = "confirmed"
    STATUS_FULL_COUNT_REQUIRED = "full_count_required"
    STATUS_FULL_COUNT_COMPLETE = "full_count_complete"

    def __init__(
        self,
        *,
        session_id: str,
        pooled: PooledContest,
        u: ErrorBoundVector,
        w: WeightSpec,
        alpha: Fraction,
        alpha_rule: AlphaRule,
        escalation: EscalationRule,
        design: SamplingDesign,
        margin: int,
        initial_n,
    ):
        self.session_id = session_id
        self.pooled = pooled
        self.u = u
        self.w = w
        self.alpha = Fraction(alpha)
        self.alpha_rule = alpha_rule
        self.escalation = escalation
        self.design = design
        self.margin = margin
        self.status = self.STATUS_OPEN
        self.stage = 1
        self.sample: list[str] = []
        self.sample_by_stage: list[list[str]] = []
        self.tallies: dict[str, HandTally] = {}
        self.errors: dict[str, int] = {}
        self.stage_records: list[StageRecord] = []
        self.events: list[dict] = []
        self.hand_winners: list[str] | None = None
        if design.kind == "per_county":
            if not isinstance(initial_n, Mapping):
                raise ValueError("per_county design needs a per-county initial size mapping")
            sizes = dict(initial_n)
            counties = set(self.pooled.counties)
            if set(sizes) - counties:
                raise ValueError("initial sizes name unknown counties")
            self.county_targets: dict[str, int] | None = {
                c: int(sizes.get(c, 0)) for c in self.pooled.counties
            }
            self.targets = [sum(self.county_targets.values())]
        else:
            self.county_targets = None
            self.targets = [int(initial_n)]
        if not 1 <= self.targets[0] <= pooled.N:
            raise SampleTooLarge(f"initial sample {self.targets[0]} of {pooled.N}")

    # -- creation ---------------------------------------------------------

    @classmethod
    def create(
        cls,
        *,
        session_id: str,
        pooled: PooledContest,
        u: ErrorBoundVector,
        w: WeightSpec,
        alpha,
        initial_n,
        alpha_rule: AlphaRule | None = None,
        escalation: EscalationRule | None = None,
        design: SamplingDesign | None = None,
        margin: int | None = None,
    ) -> "AuditSession":
        session = cls(
            session_id=session_id,
            pooled=pooled,
            u=u,
            w=w,
            alpha=parse_ratio(alpha),
            alpha_rule=alpha_rule or AlphaRule(),
            escalation=escalation or EscalationRule(),
            design=design or SamplingDesign("simple", seed=0),
            margin=pooled.margin if margin is None else margin,
            initial_n=initial_n,
        )
        session._append_event(
            "created",
            session_id=session_id,
            contest_id=pooled.contest_id,
            design=session.design.kind,
            seed=session.design.seed,
            alpha=str(session.alpha),
            weight=w.label(),
            bound=u.method,
            initial_n=initial_n if isinstance(initial_n, int) else dict(initial_n),
        )
        return session

    # -- event log --------------------------------------------------------

    def _append_event(self, kind: str, **payload):
        self.events.append({"seq": len(self.events), "event": kind, **payload})

    def event_log_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.events).encode()).hexdigest()

    # -- targets ----------------------------------------------------------

    @property
    def target_n(self) -> int:
        return self.targets[-1]

    def stage_alpha(self, s: int | None = None) -> Fraction:
        return alpha_for_stage(self.alpha, self.alpha_rule, self.stage if s is None else s)

    def _require_open(self):
        if self.status != self.STATUS_OPEN:
            raise AlreadyComplete(f"session is {self.status}")

    # -- drawing ----------------------------------------------------------

    def _stratified_targets(self, n_target: int) -> dict[str, int]:
        counties = self.pooled.counties
        sizes = [len(ps) for ps in (self.pooled.county_precincts()[c] for c in counties)]
        alloc = tailprob.proportional_allocation(n_target, sizes)
        return dict(zip(counties, alloc))

    def draw(self) -> list[str]:
        """Draw the precincts this stage still needs; returns the new ids in draw order."""
        self._require_open()
        drawn = set(self.sample)
        new: list[str] = []
        if self.design.kind == "simple":
            need = self.target_n - len(self.sample)
            if need < 0:
                raise ExhaustedPopulation("sample already exceeds the stage target")
            eligible = sorted(set(self.pooled.precinct_ids) - drawn)
            rng = VerifiableRng(draw_key(self.design.seed, self.pooled.contest_id, self.stage))
            new = select_without_replacement(eligible, need, rng)
        else:
            by_county = self.pooled.county_precincts()
            if self.design.kind == "stratified_proportional":
                targets = self._stratified_targets(self.target_n)
            else:
                assert self.county_targets is not None
                targets = self.county_targets
            for county in self.pooled.counties:
                members = [self.pooled.precinct_ids[p] for p in by_county[county]]
                have = [pid for pid in members if pid in drawn]
                need = targets.get(county, 0) - len(have)
                if need < 0:
                    raise ExhaustedPopulation(f"county {county!r} already over its target")
                if need == 0:
                    continue
                eligible = sorted(set(members) - drawn)
                rng = VerifiableRng(
                    draw_key(self.design.seed, self.pooled.contest_id, self.stage, county)
                )
                new.extend(select_without_replacement(eligible, need, rng))
        self.sample.extend(new)
        while len(self.sample_by_stage) < self.stage:
            self.sample_by_stage.append([])
        self.sample_by_stage[self.stage - 1].extend(new)
        self._append_event("draw", stage=self.stage, precincts=list(new))
        return new

    # -- tallies ----------------------------------------------------------

    def record_tallies(self, tallies: Iterable[HandTally]) -> dict[str, int]:
        """Record hand counts for sampled precincts; returns their e_p values."""
        self._require_open()
        out: dict[str, int] = {}
        in_sample = set(self.sample)
        for tally in tallies:
            pid = tally.precinct_id
            if pid not in in_sample:
                raise NotInSample(f"precinct {pid!r} was never drawn")
            if pid in self.tallies:
                raise DuplicateTally(f"precinct {pid!r} already has a tally")
            e = overstatement(self.pooled, tally)
            self.tallies[pid] = tally
            self.errors[pid] = e
            out[pid] = e
            self._append_event(
                "tally",
                stage=self.stage,
                precinct=pid,
                actual_votes=list(tally.actual_votes),
                actual_ballots=tally.actual_ballots,
                overstatement=e,
            )
        return out

    # -- evaluation -------------------------------------------------------

    def _errors_by_index(self) -> dict[int, int]:
        return {self.pooled.precinct_index(pid): e for pid, e in self.errors.items()}

    def _current_pvalue(self, t: Fraction) -> tuple[Fraction, dict]:
        n_s = len(self.sample)
        if self.design.kind == "simple":
            q = tailprob.compute_q(t, self.u, self.w, self.margin)
            p = tailprob.pi_star_from_q(q, n_s, self.pooled.N)
            return p, {"q": q, "mode": "without_replacement"}
        if self.design.kind == "stratified_proportional":
            counties = self.pooled.counties
            by_county = self.pooled.county_precincts()
            drawn = set(self.sample)
            sizes, samples = [], []
            for c in counties:
                members = [self.pooled.precinct_ids[p] for p in by_county[c]]
                sizes.append(len(members))
                samples.append(sum(1 for pid in members if pid in drawn))
            res = tailprob.stratified_pvalue_proportional(
                t, samples, sizes, self.u, self.w, self.margin
            )
            return res.p_value, {"q": res.q, "n_eff": res.n_eff, "mode": "with_replacement"}
        # per_county: worst county against its margin share
        counties = self.pooled.counties
        by_county = self.pooled.county_precincts()
        b_by_county = self.pooled.county_opportunities()
        B = self.pooled.B
        drawn = set(self.sample)
        errors = self.errors
        worst = Fraction(0)
        detail = {}
        for c in counties:
            indices = by_county[c]
            members = [self.pooled.precinct_ids[p] for p in indices]
            sampled = [pid for pid in members if pid in drawn]
            M_c = tailprob.county_margin_threshold(self.margin, b_by_county[c], B)
            if not sampled:
                p_c = Fraction(1)
            else:
                t_c = sample_statistic(
                    self.w.for_precincts(indices),
                    {
                        indices.index(self.pooled.precinct_index(pid)): errors[pid]
                        for pid in sampled
                    },
                )
                u_c = tuple(self.u.u[p] for p in indices)
                w_c = self.w.for_precincts(indices)
                q_c = tailprob.compute_q(t_c, u_c, w_c, M_c)
                p_c = tailprob.pi_star_from_q(q_c, len(sampled), len(indices))
            detail[c] = ratio_json(p_c)
            worst = max(worst, p_c)
        return worst, {"mode": "per_county", "county_p_values": detail}

    def _escalation_pvalue_fn(self, t: Fraction):
        q = tailprob.compute_q(t, self.u, self.w, self.margin)
        if self.design.kind == "stratified_proportional":
            return lambda n: tailprob.pi_diamond_from_q(q, n, self.pooled.N)
        return lambda n: tailprob.pi_star_from_q(q, n, self.pooled.N)

    def evaluate_stage(self) -> StageRecord:
        """Score the current stage and either confirm, escalate, or go to full count."""
        self._require_open()
        n_s = len(self.sample)
        if n_s < self.target_n:
            raise MissingTallies(
                f"stage {self.stage} needs {self.target_n} precincts drawn, have {n_s}"
            )
        missing = [pid for pid in self.sample if pid not in self.tallies]
        if missing:
            raise MissingTallies(f"no tally yet for: {', '.join(sorted(missing))}")
        t = sample_statistic(self.w, self._errors_by_index())
        p, detail = self._current_pvalue(t)
        alpha_s = self.stage_alpha()
        if p <= alpha_s:
            decision = "confirmed"
            self.status = self.STATUS_CONFIRMED
        elif n_s < self.pooled.N:
            decision = "escalate"
        else:
            decision = "full_count_required"
        record = StageRecord(
            stage=self.stage,
            n=n_s,
            alpha_s=alpha_s,
            statistic=t,
            p_value=p,
            decision=decision,
            detail=detail,
        )
        self.stage_records.append(record)
        self._append_event(
            "evaluate",
            stage=self.stage,
            n=n_s,
            statistic=str(t),
            p_value=str(p),
            alpha_s=str(alpha_s),
            decision=decision,
        )
        if decision == "escalate":
            alpha_next = self.stage_alpha(self.stage + 1)
            if self.design.kind == "per_county":
                self._escalate_per_county(t, alpha_next)
            else:
                nxt = next_sample_size(
                    self.escalation, n_s, self.pooled.N, alpha_next, self._escalation_pvalue_fn(t)
                )
                self.targets.append(nxt)
            self.stage += 1
            self._append_event(
                "escalate",
                stage=self.stage,
                target=self.target_n if self.county_targets is None else dict(self.county_targets),
            )
        elif decision == "full_count_required":
            # The sample is the whole contest and every precinct is tallied,
            # so the full count is already in hand; resolve it.
            self.status = self.STATUS_FULL_COUNT_COMPLETE
            self.hand_winners = self._hand_count_winners()
            self._append_event("full_count", winners=list(self.hand_winners))
        return record

    def _escalate_per_county(self, t: Fraction, alpha_next: Fraction):
        assert self.county_targets is not None
        by_county = self.pooled.county_precincts()
        b_by_county = self.pooled.county_opportunities()
        B = self.pooled.B
        new_targets = dict(self.county_targets)
        for c in self.pooled.counties:
            indices = by_county[c]
            N_c = len(indices)
            n_prev = self.county_targets[c]
            if n_prev >= N_c:
                continue
            M_c = tailprob.county_margin_threshold(self.margin, b_by_county[c], B)
            u_c = tuple(self.u.u[p] for p in indices)
            w_c = self.w.for_precincts(indices)
            if self.escalation.kind == "fixed_increment":
                inc = (
                    self.escalation.increment
                    if self.escalation.increment is not None
                    else default_increment(N_c)
                )
                new_targets[c] = min(N_c, n_prev + inc)
            else:
                q_c = tailprob.compute_q(t, u_c, w_c, M_c)
                target = tailprob._argmin_sample_size(
                    lambda n: tailprob.pi_star_from_q(q_c, n, N_c), alpha_next, N_c
                )
                new_targets[c] = min(N_c, max(n_prev + 1, target))
        if new_targets == self.county_targets:
            # Guarantee progress toward the full count.
            for c in self.pooled.counties:
                N_c = len(by_county[c])
                if new_targets[c] < N_c:
                    new_targets[c] += 1
                    break
        self.county_targets = new_targets
        self.targets.append(sum(new_targets.values()))

    def _hand_count_winners(self) -> list[str]:
        totals = []
        for j, pc in enumerate(self.pooled.pseudo):
            if self.pooled.bucket_exempt and j == self.pooled.bucket_index:
                continue
            total = sum(self.tallies[pid].actual_votes[j] for pid in self.pooled.precinct_ids)
            totals.append((j, total))
        totals.sort(key=lambda jt: (-jt[1], jt[0]))
        return [self.pooled.pseudo[j].name for j, _ in totals[: self.pooled.f]]

    # -- what-if ----------------------------------------------------------

    def what_if_tallies(self, tallies: Iterable[HandTally]) -> StageRecord:
        """Evaluate a hypothetical stage with extra tallies; never mutates."""
        ghost = copy.deepcopy(self)
        ghost.record_tallies(tallies)
        return ghost.evaluate_stage()

    def what_if_sample_size(self, n: int) -> dict:
        """Projected stage P-value if the statistic stays put and n precincts are clean."""
        if not self.errors:
            t = Fraction(0)
        else:
            t = sample_statistic(self.w, self._errors_by_index())
        fn = self._escalation_pvalue_fn(t)
        p = fn(n)
        alpha_s = self.stage_alpha()
        return {
            "projection": True,
            "n": n,
            "statistic": ratio_json(t),
            "p_value": ratio_json(p),
            "alpha_s": ratio_json(alpha_s),
            "would_confirm": bool(p <= alpha_s),
        }

    # -- reporting --------------------------------------------------------

    def report(self) -> dict:
        pooling = [
            {
                "name": pc.name,
                "total": pc.total,
                "members": list(pc.members),
                "includes_bucket": pc.includes_bucket,
                "role": "winner" if j in self.pooled.winners else "loser",
            }
            for j, pc in enumerate(self.pooled.pseudo)
        ]
        rep = {
            "schema": REPORT_SCHEMA,
            "session_id": self.session_id,
            "contest_id": self.pooled.contest_id,
            "status": self.status,
            "margin": self.margin,
            "alpha": ratio_json(self.alpha),
            "alpha_rule": {"kind": self.alpha_rule.kind, "stages": self.alpha_rule.stages},
            "escalation": {"kind": self.escalation.kind, "increment": self.escalation.increment},
            "design": {"kind": self.design.kind, "seed": self.design.seed},
            "weight": self.w.label(),
            "bound_method": self.u.method,
            "pooling_rule": self.pooled.rule,
            "pseudo_candidates": pooling,
            "N": self.pooled.N,
            "stage": self.stage,
            "sample_by_stage": [list(s) for s in self.sample_by_stage],
            "stages": [r.to_dict() for r in self.stage_records],
            "hand_count_winners": self.hand_winners,
            "caveat": CAP_CAVEAT,
            "event_log_hash": self.event_log_hash(),
        }
        return rep

    def report_text(self) -> str:
        rep = self.report()
        lines = [
            f"audit session {rep['session_id']} (contest {rep['contest_id']})",
            f"status: {rep['status']}   margin: {rep['margin']} votes   "
            f"design: {rep['design']['kind']} seed={rep['design']['seed']}",
            f"bound: {rep['bound_method']}   weight: {rep['weight']}   "
            f"alpha: {rep['alpha']['decimal']} ({rep['alpha_rule']['kind']})",
            "",
            f"{'stage':>5} {'n':>5} {'alpha_s':>10} {'statistic':>12} {'p-value':>22} decision",
        ]
        for row in rep["stages"]:
            stat = row["statistic"]["decimal"] if row["statistic"] else "-"
            pv = row["p_value"]
            pv_s = f"{pv['numerator']}/{pv['denominator']} ({pv['percent']})" if pv else "-"
            lines.append(
                f"{row['stage']:>5} {row['n']:>5} {row['alpha_s']['decimal']:>10} "
                f"{stat:>12} {pv_s:>22} {row['decision']}"
            )
        if rep["hand_count_winners"]:
            lines.append("")
            lines.append("hand-count winners: " + ", ".join(rep["hand_count_winners"]))
        lines.append("")
        lines.append(rep["caveat"])
        lines.append(f"event log hash: {rep['event_log_hash']}")
        return "\n".join(lines) + "\n"

    # -- persistence ------------------------------------------------------

    def to_dict(self) -> dict:
        pooled = self.pooled
        return {
            "schema": SESSION_SCHEMA,
            "session_id": self.session_id,
            "pooled": {
                "contest_id": pooled.contest_id,
                "f": pooled.f,
                "rule": pooled.rule,
                "precinct_ids": list(pooled.precinct_ids),
                "county_ids": list(pooled.county_ids),
                "b": list(pooled.b),
                "r": list(pooled.r),
                "pseudo": [
                    {
                        "name": pc.name,
                        "members": list(pc.members),
                        "includes_bucket": pc.includes_bucket,
                        "votes": list(pc.votes),
                        "total": pc.total,
                    }
                    for pc in pooled.pseudo
                ],
                "winners": list(pooled.winners),
                "losers": list(pooled.losers),
                "bucket_index": pooled.bucket_index,
                "bucket_exempt": pooled.bucket_exempt,
                "margin": pooled.margin,
                "runner_up_total": pooled.runner_up_total,
                "tied": pooled.tied,
                "unopposed": pooled.unopposed,
            },
            "u": {"u": list(self.u.u), "method": self.u.method, "r": list(self.u.r)},
            "w": {"family": self.w.family, "m": self.w.m, "b": list(self.w.b) if self.w.b else None},
            "alpha": str(self.alpha),
            "alpha_rule": {"kind": self.alpha_rule.kind, "stages": self.alpha_rule.stages},
            "escalation": {"kind": self.escalation.kind, "increment": self.escalation.increment},
            "design": {"kind": self.design.kind, "seed": self.design.seed},
            "margin": self.margin,
            "status": self.status,
            "stage": self.stage,
            "targets": list(self.targets),
            "county_targets": dict(self.county_targets) if self.county_targets else None,
            "sample": list(self.sample),
            "sample_by_stage": [list(s) for s in self.sample_by_stage],
            "tallies": {
                pid: {
                    "actual_votes": list(t.actual_votes),
                    "actual_ballots": t.actual_ballots,
                }
                for pid, t in sorted(self.tallies.items())
            },
            "errors": {pid: e for pid, e in sorted(self.errors.items())},
            "stage_records": [r.to_dict() for r in self.stage_records],
            "hand_winners": self.hand_winners,
            "events": self.events,
            "event_log_hash": self.event_log_hash(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AuditSession":
        if d.get("schema") != SESSION_SCHEMA:
            raise SessionIntegrity(f"unknown session schema {d.get('schema')!r}")
        pd = d["pooled"]
        pooled = PooledContest(
            contest_id=pd["contest_id"],
            f=pd["f"],
            rule=pd["rule"],
            precinct_ids=tuple(pd["precinct_ids"]),
            county_ids=tuple(pd["county_ids"]),
            b=tuple(pd["b"]),
            r=tuple(pd["r"]),
            pseudo=tuple(
                PseudoCandidate(
                    name=pc["name"],
                    members=tuple(pc["members"]),
                    includes_bucket=pc["includes_bucket"],
                    votes=tuple(pc["votes"]),
                    total=pc["total"],
                )
                for pc in pd["pseudo"]
            ),
            winners=tuple(pd["winners"]),
            losers=tuple(pd["losers"]),
            bucket_index=pd["bucket_index"],
            bucket_exempt=pd["bucket_exempt"],
            margin=pd["margin"],
            runner_up_total=pd["runner_up_total"],
            tied=pd["tied"],
            unopposed=pd["unopposed"],
        )
        u = ErrorBoundVector(u=tuple(d["u"]["u"]), method=d["u"]["method"], r=tuple(d["u"]["r"]))
        wd = d["w"]
        w = WeightSpec(wd["family"], m=wd["m"], b=tuple(wd["b"]) if wd["b"] else None)
        session = cls(
            session_id=d["session_id"],
            pooled=pooled,
            u=u,
            w=w,
            alpha=Fraction(d["alpha"]),
            alpha_rule=AlphaRule(d["alpha_rule"]["kind"], d["alpha_rule"]["stages"]),
            escalation=EscalationRule(d["escalation"]["kind"], d["escalation"]["increment"]),
            design=SamplingDesign(d["design"]["kind"], d["design"]["seed"]),
            margin=d["margin"],
            initial_n=d["targets"][0] if d["county_targets"] is None else d["county_targets"],
        )
        session.status = d["status"]
        session.stage = d["stage"]
        session.targets = list(d["targets"])
        session.county_targets = (
            dict(d["county_targets"]) if d["county_targets"] is not None else None
        )
        session.sample = list(d["sample"])
        session.sample_by_stage = [list(s) for s in d["sample_by_stage"]]
        session.tallies = {
            pid: HandTally(pid, tuple(t["actual_votes"]), t["actual_ballots"])
            for pid, t in d["tallies"].items()
        }
        session.errors = {pid: int(e) for pid, e in d["errors"].items()}
        session.stage_records = [StageRecord.from_dict(r) for r in d["stage_records"]]
        session.hand_winners = d["hand_winners"]
        session.events = [dict(e) for e in d["events"]]
        if session.event_log_hash() != d["event_log_hash"]:
            raise SessionIntegrity("event log hash mismatch; session file is corrupt or stale")
        return session
