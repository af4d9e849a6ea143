"""Command-line workflow: plan, run, one-shot P-values, and the HTTP service.

Exit codes: 0 success, 1 domain error (validation failures, infeasible
audits, protocol misuse), 2 usage error. Every report prints the seed so an
observer can replay each draw.
"""

from __future__ import annotations

import functools
import json
from fractions import Fraction
from pathlib import Path

import click

from . import contest_io, tailprob
from .discrepancy import (
    ErrorBoundVector,
    WeightSpec,
    bounds_e_plus,
    bounds_fraction,
    bounds_supermajority,
    sample_statistic,
)
from .errors import AuditError
from .exact import decimal_string, parse_ratio, percent_string, ratio_json
from .model import PooledContest, apparent_outcome, pool_losers
from .protocol import AlphaRule, AuditSession, EscalationRule, SamplingDesign

DESIGN_NAMES = {
    "simple": "simple",
    "proportional": "stratified_proportional",
    "per-county": "per_county",
}


def domain_errors(fn):
    """Map AuditError to exit code 1 with the error class visible."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except AuditError as exc:
            raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc

    return wrapper


def build_weight(name: str, pooled: PooledContest) -> WeightSpec:
    if name == "identity":
        return WeightSpec.identity()
    if name == "per-opportunity":
        return WeightSpec.per_opportunity(pooled.b)
    if name.startswith("thresholded"):
        _, _, m = name.partition(":")
        return WeightSpec.thresholded(pooled.b, m=int(m) if m else 2)
    raise click.UsageError(f"unknown weight family {name!r}")


def build_bounds(name: str, pooled: PooledContest) -> ErrorBoundVector:
    if name == "e-plus":
        return bounds_e_plus(pooled)
    if name.startswith("fraction"):
        _, _, lam = name.partition(":")
        if not lam:
            raise click.UsageError("fraction bound needs a ratio, e.g. fraction:0.4")
        return bounds_fraction(pooled, parse_ratio(lam))
    if name == "supermajority":
        return bounds_supermajority(pooled)
    raise click.UsageError(f"unknown bound method {name!r}")


def fr_text(fr: Fraction) -> str:
    return f"{fr.numerator}/{fr.denominator} ({percent_string(fr)})"


@click.group()
@click.version_option(package_name="electaudit")
def main():
    """Risk-limiting audit calculations for precinct-count contests."""


@main.command()
@click.argument("contest_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha", default="0.05", show_default=True, help="Risk limit for the first stage.")
@click.option("--threshold", "t1", default="0", show_default=True,
              help="Statistic level treated as background error when sizing the sample.")
@click.option("--bound", default="e-plus", show_default=True,
              help="Error bound method: e-plus | fraction:RATIO | supermajority.")
@click.option("--weight", default="per-opportunity", show_default=True,
              help="Weight family: identity | per-opportunity | thresholded:M.")
@click.option("--design", type=click.Choice(sorted(DESIGN_NAMES)), default="simple",
              show_default=True)
@click.option("--pooling", type=click.Choice(["maximize-min-group", "fewest-groups", "none"]),
              default="maximize-min-group", show_default=True)
@click.option("--votes-allowed", default=1, show_default=True,
              help="Votes allowed per ballot when reading CSV contests.")
@click.option("--json", "as_json", is_flag=True, help="Emit the plan as JSON.")
@domain_errors
def plan(contest_file, alpha, t1, bound, weight, design, pooling, votes_allowed, as_json):
    """Size the first sample for a contest at a given risk limit."""
    spec = contest_io.load_contest(contest_file, f=votes_allowed)
    pooled = pool_losers(spec, pooling)
    outcome = apparent_outcome(spec)
    u = build_bounds(bound, pooled)
    w = build_weight(weight, pooled)
    alpha_fr = parse_ratio(alpha)
    t1_fr = parse_ratio(t1)
    design_kind = DESIGN_NAMES[design]
    winners = [spec.candidates[k].name for k in outcome.winners]

    if design_kind == "per_county":
        by_county = pooled.county_precincts()
        b_by_county = pooled.county_opportunities()
        slices = {
            c: tailprob.CountyAuditSlice(
                u=tuple(u.u[p] for p in idx),
                w=w.for_precincts(idx),
                M_c=tailprob.county_margin_threshold(pooled.margin, b_by_county[c], pooled.B),
            )
            for c, idx in by_county.items()
        }
        n1 = tailprob.initial_sample_size(t1_fr, alpha_fr, u, w, pooled.margin,
                                          design="per_county", counties=slices)
    else:
        n1 = tailprob.initial_sample_size(
            t1_fr, alpha_fr, u, w, pooled.margin,
            design="simple" if design_kind == "simple" else "proportional",
        )

    doc = {
        "contest_id": spec.contest_id,
        "N": spec.N,
        "ballots": sum(pr.reported_ballots for pr in spec.precincts),
        "opportunities": spec.B,
        "winners": winners,
        "margin": pooled.margin,
        "pooling": pooling,
        "pseudo_candidates": [
            {"name": pc.name, "total": pc.total, "members": list(pc.members)}
            for pc in pooled.pseudo
        ],
        "bound": u.method,
        "bound_min": min(u.u),
        "bound_max": max(u.u),
        "bound_total": sum(u.u),
        "weight": w.label(),
        "alpha": ratio_json(alpha_fr),
        "threshold": ratio_json(t1_fr),
        "design": design,
        "initial_sample_size": n1,
    }
    if as_json:
        click.echo(json.dumps(doc, indent=2))
        return
    click.echo(
        f"contest {spec.contest_id}: {spec.N} precincts, {doc['ballots']} ballots, "
        f"{spec.B} voting opportunities"
    )
    click.echo(f"apparent winners: {', '.join(winners)}   margin: {pooled.margin} votes")
    click.echo(
        f"pooling ({pooling}): {pooled.K} pseudo-candidates "
        f"({', '.join(f'{pc.name}={pc.total}' for pc in pooled.pseudo)})"
    )
    click.echo(
        f"error bounds ({u.method}): min {min(u.u)}, max {max(u.u)}, total {sum(u.u)}"
    )
    if isinstance(n1, dict):
        for county, size in n1.items():
            N_c = len(pooled.county_precincts()[county])
            click.echo(f"county {county}: n1 = {size} of {N_c}")
        return
    if n1 >= spec.N:
        p_full = tailprob.pi_star(t1_fr, spec.N, u, w, pooled.margin)
        if p_full < alpha_fr:
            click.echo(
                f"n1 = {n1} of {spec.N} (full hand count required to plan at this threshold)"
            )
        else:
            click.echo(
                f"n1 = {n1} of {spec.N} (no sample confirms at this threshold; "
                f"a lower per-precinct threshold is needed)"
            )
    else:
        click.echo(f"n1 = {n1} of {spec.N}")


@main.group()
def run():
    """Drive a sequential audit session stored in a JSON file."""


def _echo_stage(record, alpha_label="alpha_s"):
    p = record.p_value
    a = record.alpha_s
    if record.decision == "confirmed":
        click.echo(
            f"Confirmed; stage P-value {fr_text(p)} <= {alpha_label} {fr_text(a)}"
        )
    elif record.decision == "escalate":
        click.echo(
            f"Escalate; stage P-value {fr_text(p)} > {alpha_label} {fr_text(a)}"
        )
    else:
        click.echo("Full count complete; hand-count winners reported")


@run.command()
@click.argument("session_file", type=click.Path(dir_okay=False))
@click.option("--contest", "contest_file", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha", required=True, help="Overall risk limit, e.g. 0.1 or 1/10.")
@click.option("--seed", required=True, type=int, help="Public sampling seed.")
@click.option("--initial-n", type=int, default=None,
              help="First-stage sample size (simple/proportional designs).")
@click.option("--initial-county", "initial_county", multiple=True,
              help="Per-county first-stage size NAME=N (per-county design).")
@click.option("--threshold", "t1", default=None,
              help="Derive the first-stage size from this background statistic level.")
@click.option("--bound", default="e-plus", show_default=True)
@click.option("--weight", default="per-opportunity", show_default=True)
@click.option("--design", type=click.Choice(sorted(DESIGN_NAMES)), default="simple",
              show_default=True)
@click.option("--pooling", type=click.Choice(["maximize-min-group", "fewest-groups", "none"]),
              default="maximize-min-group", show_default=True)
@click.option("--alpha-rule", "alpha_rule", default="halving", show_default=True,
              help="halving | fixed:S (spend alpha/S for S stages).")
@click.option("--escalation", default="minimal-confirming", show_default=True,
              help="minimal-confirming | fixed-increment[:N].")
@click.option("--votes-allowed", default=1, show_default=True)
@click.option("--session-id", default=None, help="Defaults to CONTEST_ID:SEED.")
@domain_errors
def create(session_file, contest_file, alpha, seed, initial_n, initial_county, t1,
           bound, weight, design, pooling, alpha_rule, escalation, votes_allowed,
           session_id):
    """Start a session and write its state file."""
    spec = contest_io.load_contest(contest_file, f=votes_allowed)
    pooled = pool_losers(spec, pooling)
    u = build_bounds(bound, pooled)
    w = build_weight(weight, pooled)
    design_kind = DESIGN_NAMES[design]
    alpha_fr = parse_ratio(alpha)

    if alpha_rule == "halving":
        rule = AlphaRule("halving")
    elif alpha_rule.startswith("fixed:"):
        rule = AlphaRule("fixed_s", int(alpha_rule.split(":", 1)[1]))
    else:
        raise click.UsageError(f"unknown alpha rule {alpha_rule!r}")

    if escalation == "minimal-confirming":
        esc = EscalationRule("minimal_confirming")
    elif escalation.startswith("fixed-increment"):
        _, _, inc = escalation.partition(":")
        esc = EscalationRule("fixed_increment", int(inc) if inc else None)
    else:
        raise click.UsageError(f"unknown escalation rule {escalation!r}")

    from .protocol import alpha_for_stage

    alpha1 = alpha_for_stage(alpha_fr, rule, 1)
    if design_kind == "per_county":
        if initial_county:
            sizes = {}
            for item in initial_county:
                name, _, val = item.partition("=")
                sizes[name] = int(val)
            first = sizes
        elif t1 is not None:
            by_county = pooled.county_precincts()
            b_by_county = pooled.county_opportunities()
            slices = {
                c: tailprob.CountyAuditSlice(
                    u=tuple(u.u[p] for p in idx),
                    w=w.for_precincts(idx),
                    M_c=tailprob.county_margin_threshold(pooled.margin, b_by_county[c], pooled.B),
                )
                for c, idx in by_county.items()
            }
            first = tailprob.initial_sample_size(parse_ratio(t1), alpha1, u, w, pooled.margin,
                                                 design="per_county", counties=slices)
        else:
            raise click.UsageError("per-county design needs --initial-county or --threshold")
    else:
        if initial_n is not None:
            first = initial_n
        elif t1 is not None:
            first = tailprob.initial_sample_size(
                parse_ratio(t1), alpha1, u, w, pooled.margin,
                design="simple" if design_kind == "simple" else "proportional",
            )
        else:
            raise click.UsageError("need --initial-n or --threshold")

    session = AuditSession.create(
        session_id=session_id or f"{spec.contest_id}:{seed}",
        pooled=pooled,
        u=u,
        w=w,
        alpha=alpha_fr,
        initial_n=first,
        alpha_rule=rule,
        escalation=esc,
        design=SamplingDesign(design_kind, seed=seed),
    )
    contest_io.save_session(session_file, session)
    click.echo(f"created session {session.session_id} (seed {seed}, stage target {first})")


@run.command()
@click.argument("session_file", type=click.Path(exists=True, dir_okay=False))
@domain_errors
def draw(session_file):
    """Draw the precincts the current stage still needs."""
    session = contest_io.load_session(session_file)
    new = session.draw()
    contest_io.save_session(session_file, session)
    if new:
        click.echo(f"drawn (stage {session.stage}): {', '.join(new)}")
    else:
        click.echo(f"stage {session.stage} target already met; nothing drawn")


@run.command()
@click.argument("session_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--tallies", "tallies_file", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="CSV with one column per pseudo-candidate plus ballots.")
@domain_errors
def record(session_file, tallies_file):
    """Record hand tallies for sampled precincts."""
    session = contest_io.load_session(session_file)
    text = Path(tallies_file).read_text(encoding="utf-8")
    tallies = contest_io.tallies_from_csv(session.pooled, text)
    errors = session.record_tallies(tallies)
    contest_io.save_session(session_file, session)
    for pid, e in errors.items():
        click.echo(f"{pid}: overstatement {e}")


@run.command()
@click.argument("session_file", type=click.Path(exists=True, dir_okay=False))
@domain_errors
def evaluate(session_file):
    """Score the stage: confirm, escalate, or complete the full count."""
    session = contest_io.load_session(session_file)
    record = session.evaluate_stage()
    contest_io.save_session(session_file, session)
    _echo_stage(record)
    if session.status == AuditSession.STATUS_OPEN:
        target = session.county_targets if session.county_targets else session.target_n
        click.echo(f"next stage {session.stage} target: {target}")
    elif session.hand_winners:
        click.echo(f"hand-count winners: {', '.join(session.hand_winners)}")


@run.command()
@click.argument("session_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def report(session_file, as_json):
    """Print the session report."""
    session = contest_io.load_session(session_file)
    if as_json:
        click.echo(json.dumps(session.report(), indent=2))
    else:
        click.echo(session.report_text(), nl=False)


@main.command()
@click.option("--q", "q_value", type=int, default=None,
              help="Precomputed q; with --n and --N skips contest data entirely.")
@click.option("--n", "n_value", type=int, default=None)
@click.option("--N", "N_value", type=int, default=None)
@click.option("--mode", type=click.Choice(["without-replacement", "with-replacement",
                                           "proportional"]),
              default="without-replacement", show_default=True)
@click.option("--contest", "contest_file", type=click.Path(exists=True, dir_okay=False),
              default=None)
@click.option("--tallies", "tallies_file", type=click.Path(exists=True, dir_okay=False),
              default=None)
@click.option("--statistic", "t_value", default=None,
              help="Observed statistic; defaults to the max weighted tally error.")
@click.option("--bound", "bound_names", multiple=True, default=("e-plus",),
              show_default=True)
@click.option("--weight", "weight_names", multiple=True, default=("per-opportunity",),
              show_default=True)
@click.option("--pooling", type=click.Choice(["maximize-min-group", "fewest-groups", "none"]),
              default="maximize-min-group", show_default=True)
@click.option("--votes-allowed", default=1, show_default=True)
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def pvalue(q_value, n_value, N_value, mode, contest_file, tallies_file, t_value,
           bound_names, weight_names, pooling, votes_allowed, as_json):
    """One-shot maximum P-values, from a contest plus tallies or a (q, n, N) triple."""
    rows = []
    if q_value is not None or n_value is not None or N_value is not None:
        if None in (q_value, n_value, N_value):
            raise click.UsageError("--q, --n and --N must be given together")
        if mode == "without-replacement":
            p = tailprob.pi_star_from_q(q_value, n_value, N_value)
        else:
            p = tailprob.pi_diamond_from_q(q_value, n_value, N_value)
        rows.append({"mode": mode, "q": q_value, "n": n_value, "N": N_value,
                     "p_value": ratio_json(p)})
    else:
        if not contest_file or not tallies_file:
            raise click.UsageError("need either --q/--n/--N or --contest with --tallies")
        spec = contest_io.load_contest(contest_file, f=votes_allowed)
        pooled = pool_losers(spec, pooling)
        tallies = contest_io.tallies_from_csv(
            pooled, Path(tallies_file).read_text(encoding="utf-8")
        )
        from .discrepancy import overstatement

        errors = {
            pooled.precinct_index(t.precinct_id): overstatement(pooled, t) for t in tallies
        }
        n = len(errors)
        for bname in bound_names:
            u = build_bounds(bname, pooled)
            for wname in weight_names:
                w = build_weight(wname, pooled)
                t = parse_ratio(t_value) if t_value is not None else sample_statistic(w, errors)
                q = tailprob.compute_q(t, u, w, pooled.margin)
                p = (tailprob.pi_star_from_q(q, n, pooled.N)
                     if mode == "without-replacement"
                     else tailprob.pi_diamond_from_q(q, n, pooled.N))
                rows.append({"mode": mode, "bound": u.method, "weight": w.label(),
                             "statistic": ratio_json(t), "q": q, "n": n, "N": pooled.N,
                             "p_value": ratio_json(p)})
    if as_json:
        click.echo(json.dumps({"rows": rows}, indent=2))
        return
    for row in rows:
        pv = row["p_value"]
        label = " ".join(
            f"{k}={row[k]}" for k in ("bound", "weight", "mode", "q", "n", "N") if k in row
        )
        if len(pv["numerator"]) + len(pv["denominator"]) <= 40:
            click.echo(f"{label}  P = {pv['numerator']}/{pv['denominator']} "
                       f"= {pv['decimal']} ({pv['percent']})")
        else:
            # exact form available under --json; the ratio is unreadable here
            click.echo(f"{label}  P = {pv['decimal']} ({pv['percent']})")


@main.command()
@click.option("--port", default=8642, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--state-dir", required=True, type=click.Path(file_okay=False))
@click.option("--static-dir", type=click.Path(file_okay=False, exists=True), default=None,
              help="Optional directory of UI assets to serve at /.")
@domain_errors
def serve(port, host, state_dir, static_dir):
    """Run the local HTTP/JSON audit service."""
    import uvicorn

    from .service import create_app

    app = create_app(Path(state_dir), static_dir=Path(static_dir) if static_dir else None)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
