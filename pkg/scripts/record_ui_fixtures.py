#!/usr/bin/env python3
"""Record live service payloads for the browser console's test fixtures.

Run from the repository root:

    python3 scripts/record_ui_fixtures.py

Drives the HTTP service in-process through a stage of the Sausalito 2006
audit and freezes the JSON responses under frontend/fixtures/.  The
console's unit tests replay these files instead of talking to a running
service, so every number they assert on is a verbatim service value.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from electaudit.contest_io import contest_to_dict, load_contest
from electaudit.service import create_app

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "frontend" / "fixtures" / "sausalito-session.json"
TALLY_3107 = {
    "precinct_id": "3107",
    "actual_votes": [251, 260, 235, 214, 56, 732],
    "actual_ballots": 583,
}


def main() -> None:
    spec = load_contest(ROOT / "data" / "sausalito_2006.json")
    with tempfile.TemporaryDirectory() as state:
        app = create_app(Path(state))
        with TestClient(app) as c:
            contest_summary = c.post("/contests", json=contest_to_dict(spec)).json()

            base = {"contest_id": spec.contest_id, "alpha": "0.1", "seed": 9, "initial_n": 1}
            created = c.post("/sessions", json=base).json()
            sid = created["session_id"]
            draw = c.post(f"/sessions/{sid}/draw").json()
            what_if_tallies = c.post(
                f"/sessions/{sid}/what-if", json={"tallies": [TALLY_3107]}
            ).json()
            tallies = c.post(f"/sessions/{sid}/tallies", json={"tallies": [TALLY_3107]}).json()
            evaluated = c.post(f"/sessions/{sid}/evaluate").json()
            view = c.get(f"/sessions/{sid}").json()

            what_if_ok = c.post(f"/sessions/{sid}/what-if", json={"sample_size": 9}).json()
            too_large = c.post(f"/sessions/{sid}/what-if", json={"sample_size": 99})
            not_in = c.post(
                f"/sessions/{sid}/tallies",
                json={"tallies": [{"precinct_id": "3001", "actual_votes": [0] * 6,
                                   "actual_ballots": 0}]},
            )
            dup_session = c.post("/sessions", json=base)

            # a lenient single-stage plan where 8/9 already confirms; same
            # seed keeps the drawn precinct (and tally) identical
            lax = dict(base, alpha="0.9", session_id=f"{spec.contest_id}:lax",
                       alpha_rule={"kind": "fixed_s", "stages": 1})
            confirmed_id = c.post("/sessions", json=lax).json()["session_id"]
            c.post(f"/sessions/{confirmed_id}/draw")
            c.post(f"/sessions/{confirmed_id}/tallies", json={"tallies": [TALLY_3107]})
            c.post(f"/sessions/{confirmed_id}/evaluate")
            confirmed_view = c.get(f"/sessions/{confirmed_id}").json()

    assert view["latest"]["decision"] == "escalate"
    assert view["latest"]["p_value"]["percent"] == "88.9%"
    assert confirmed_view["status"] == "confirmed"

    doc = {
        "contest_summary": contest_summary,
        "escalating": {
            "created": created,
            "draw": draw,
            "tallies": tallies,
            "evaluated": evaluated,
            "view": view,
        },
        "confirmed": {"view": confirmed_view},
        "what_if": {
            "tallies_ok": what_if_tallies,
            "sample_size_ok": what_if_ok,
            "sample_size_too_large": {"status": too_large.status_code,
                                      "body": too_large.json()},
        },
        "errors": {
            "not_in_sample": {"status": not_in.status_code, "body": not_in.json()},
            "duplicate_session": {"status": dup_session.status_code,
                                  "body": dup_session.json()},
        },
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {OUT.relative_to(ROOT)}")


if __name__ == "__main__":
    main()
