"""Local HTTP/JSON service over the audit workflow.

One state file per contest and per session under the state directory;
mutations to a session are serialized behind a per-session lock, everything
else reads immutable snapshots. P-values travel as exact numerator and
denominator strings with decimal and percent renderings, so clients never do
probability arithmetic.
"""

from __future__ import annotations

import json
import re
import threading
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from . import contest_io, tailprob
from .discrepancy import HandTally, WeightSpec, bounds_e_plus, bounds_fraction, bounds_supermajority
from .errors import AuditError, StageBeyondS
from .exact import parse_ratio, ratio_json
from .model import apparent_outcome, pool_losers
from .protocol import AlphaRule, AuditSession, EscalationRule, SamplingDesign

_ID_RE = re.compile(r"^[A-Za-z0-9._:-]{1,128}$")

_DESIGNS = {"simple", "stratified_proportional", "per_county"}
_POOLINGS = ("maximize-min-group", "fewest-groups", "none")


def _check_id(kind: str, value: str) -> str:
    if not _ID_RE.match(value):
        raise HTTPException(400, f"{kind} id must match {_ID_RE.pattern}")
    return value


def _build_bounds(name: str, pooled):
    if name == "e-plus":
        return bounds_e_plus(pooled)
    if name.startswith("fraction"):
        _, _, lam = name.partition(":")
        if not lam:
            raise HTTPException(400, "fraction bound needs a ratio, e.g. fraction:0.4")
        return bounds_fraction(pooled, parse_ratio(lam))
    if name == "supermajority":
        return bounds_supermajority(pooled)
    raise HTTPException(400, f"unknown bound method {name!r}")


def _build_weight(name: str, pooled) -> WeightSpec:
    if name == "identity":
        return WeightSpec.identity()
    if name == "per-opportunity":
        return WeightSpec.per_opportunity(pooled.b)
    if name.startswith("thresholded"):
        _, _, m = name.partition(":")
        return WeightSpec.thresholded(pooled.b, m=int(m) if m else 2)
    raise HTTPException(400, f"unknown weight family {name!r}")


class SessionStore:
    """Disk-backed sessions with one lock per session id."""

    def __init__(self, root: Path):
        self.root = root
        self.root.mkdir(parents=True, exist_ok=True)
        self._cache: dict[str, AuditSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._registry:
            return self._locks.setdefault(session_id, threading.Lock())

    def path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.json"

    def load(self, session_id: str) -> AuditSession:
        # caller must hold the session lock
        if session_id in self._cache:
            return self._cache[session_id]
        path = self.path(session_id)
        if not path.exists():
            raise HTTPException(404, f"no session {session_id!r}")
        session = contest_io.load_session(path)
        self._cache[session_id] = session
        return session

    def save(self, session: AuditSession) -> None:
        contest_io.save_session(self.path(session.session_id), session)
        self._cache[session.session_id] = session

    def exists(self, session_id: str) -> bool:
        return session_id in self._cache or self.path(session_id).exists()


def _session_view(session: AuditSession) -> dict:
    tallied_stage = {}
    for stage_no, drawn in enumerate(session.sample_by_stage, start=1):
        for pid in drawn:
            tallied_stage[pid] = stage_no
    view = session.report()
    view["sample"] = [
        {
            "precinct_id": pid,
            "stage_drawn": tallied_stage.get(pid),
            "tallied": pid in session.tallies,
            "overstatement": session.errors.get(pid),
        }
        for pid in session.sample
    ]
    view["target"] = (
        dict(session.county_targets) if session.county_targets is not None else session.target_n
    )
    if session.status == AuditSession.STATUS_OPEN:
        try:
            view["alpha_s"] = ratio_json(session.stage_alpha())
        except StageBeyondS:
            view["alpha_s"] = None
    else:
        view["alpha_s"] = None
    view["latest"] = view["stages"][-1] if view["stages"] else None
    return view


def _parse_tallies(payload: dict) -> list[HandTally]:
    items = payload.get("tallies")
    if not isinstance(items, list) or not items:
        raise HTTPException(400, "body must carry a non-empty 'tallies' list")
    out = []
    for item in items:
        try:
            out.append(
                HandTally(
                    precinct_id=item["precinct_id"],
                    actual_votes=tuple(int(v) for v in item["actual_votes"]),
                    actual_ballots=int(item["actual_ballots"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(400, f"malformed tally entry: {exc}") from None
    return out


def create_app(state_dir: Path, static_dir: Path | None = None) -> FastAPI:
    state_dir = Path(state_dir)
    contests_dir = state_dir / "contests"
    contests_dir.mkdir(parents=True, exist_ok=True)
    store = SessionStore(state_dir / "sessions")

    app = FastAPI(title="electaudit", docs_url=None, redoc_url=None)

    @app.exception_handler(AuditError)
    def _domain_error(request: Request, exc: AuditError):
        return JSONResponse(
            status_code=400,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    def _contest_path(contest_id: str) -> Path:
        return contests_dir / f"{contest_id}.json"

    def _load_contest(contest_id: str):
        path = _contest_path(contest_id)
        if not path.exists():
            raise HTTPException(404, f"no contest {contest_id!r}")
        return contest_io.contest_from_dict(json.loads(path.read_text(encoding="utf-8")))

    @app.post("/contests")
    def ingest_contest(payload: dict = Body(...)):
        spec = contest_io.contest_from_dict(payload)
        _check_id("contest", spec.contest_id)
        contest_io.atomic_write_text(
            _contest_path(spec.contest_id),
            json.dumps(contest_io.contest_to_dict(spec), indent=2) + "\n",
        )
        outcome = apparent_outcome(spec)
        return {
            "contest_id": spec.contest_id,
            "N": spec.N,
            "ballots": sum(pr.reported_ballots for pr in spec.precincts),
            "opportunities": spec.B,
            "winners": [spec.candidates[k].name for k in outcome.winners],
            "margin": outcome.margin,
        }

    @app.get("/contests/{contest_id}")
    def get_contest(contest_id: str):
        _check_id("contest", contest_id)
        spec = _load_contest(contest_id)
        return contest_io.contest_to_dict(spec)

    @app.post("/sessions")
    def create_session(payload: dict = Body(...)):
        contest_id = payload.get("contest_id")
        if not contest_id:
            raise HTTPException(400, "contest_id is required")
        _check_id("contest", contest_id)
        spec = _load_contest(contest_id)
        pooling = payload.get("pooling", "maximize-min-group")
        if pooling not in _POOLINGS:
            raise HTTPException(400, f"pooling must be one of {_POOLINGS}")
        pooled = pool_losers(spec, pooling)
        u = _build_bounds(payload.get("bound", "e-plus"), pooled)
        w = _build_weight(payload.get("weight", "per-opportunity"), pooled)
        design_kind = payload.get("design", "simple")
        if design_kind not in _DESIGNS:
            raise HTTPException(400, f"design must be one of {sorted(_DESIGNS)}")
        try:
            seed = int(payload["seed"])
            alpha = parse_ratio(payload["alpha"])
        except KeyError as exc:
            raise HTTPException(400, f"missing field {exc}") from None
        ar = payload.get("alpha_rule", {"kind": "halving"})
        rule = AlphaRule(ar.get("kind", "halving"), ar.get("stages"))
        er = payload.get("escalation", {"kind": "minimal_confirming"})
        esc = EscalationRule(er.get("kind", "minimal_confirming"), er.get("increment"))
        initial = payload.get("initial_n")
        if initial is None:
            raise HTTPException(400, "initial_n is required (int, or county map for per_county)")
        session_id = payload.get("session_id") or f"{contest_id}:{seed}"
        _check_id("session", session_id)
        lock = store.lock(session_id)
        with lock:
            if store.exists(session_id):
                raise HTTPException(409, f"session {session_id!r} already exists")
            try:
                session = AuditSession.create(
                    session_id=session_id,
                    pooled=pooled,
                    u=u,
                    w=w,
                    alpha=alpha,
                    initial_n=initial,
                    alpha_rule=rule,
                    escalation=esc,
                    design=SamplingDesign(design_kind, seed=seed),
                )
            except ValueError as exc:
                raise HTTPException(400, str(exc)) from None
            store.save(session)
            return _session_view(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        _check_id("session", session_id)
        with store.lock(session_id):
            return _session_view(store.load(session_id))

    @app.post("/sessions/{session_id}/draw")
    def draw(session_id: str):
        _check_id("session", session_id)
        with store.lock(session_id):
            session = store.load(session_id)
            drawn = session.draw()
            store.save(session)
            view = _session_view(session)
            view["drawn"] = drawn
            return view

    @app.post("/sessions/{session_id}/tallies")
    def record_tallies(session_id: str, payload: dict = Body(...)):
        _check_id("session", session_id)
        tallies = _parse_tallies(payload)
        with store.lock(session_id):
            session = store.load(session_id)
            errors = session.record_tallies(tallies)
            store.save(session)
            view = _session_view(session)
            view["overstatements"] = errors
            return view

    @app.post("/sessions/{session_id}/evaluate")
    def evaluate(session_id: str):
        _check_id("session", session_id)
        with store.lock(session_id):
            session = store.load(session_id)
            record = session.evaluate_stage()
            store.save(session)
            view = _session_view(session)
            view["stage_record"] = record.to_dict()
            return view

    @app.post("/sessions/{session_id}/what-if")
    def what_if(session_id: str, payload: dict = Body(...)):
        _check_id("session", session_id)
        with store.lock(session_id):
            session = store.load(session_id)
            if "sample_size" in payload:
                try:
                    n = int(payload["sample_size"])
                except (TypeError, ValueError):
                    raise HTTPException(400, "sample_size must be an integer") from None
                if not 1 <= n <= session.pooled.N:
                    raise HTTPException(400, f"sample_size must be in 1..{session.pooled.N}")
                return session.what_if_sample_size(n)
            tallies = _parse_tallies(payload)
            record = session.what_if_tallies(tallies)
            out = record.to_dict()
            out["projection"] = True
            return out

    @app.get("/sessions/{session_id}/report")
    def report(session_id: str, format: str = "json"):
        _check_id("session", session_id)
        with store.lock(session_id):
            session = store.load(session_id)
            if format == "text":
                return PlainTextResponse(session.report_text())
            return session.report()

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
