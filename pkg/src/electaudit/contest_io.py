"""File formats: contest JSON/CSV, hand-tally CSV, session persistence.

The JSON contest document is schema-versioned and mirrors ContestSpec field
for field. The CSV layout is one row per precinct (precinct_id, county_id,
ballots, invalid, undervotes, then one column per candidate); it carries no
votes-allowed count, so CSV ingestion takes f separately. Tally CSVs have one
column per pseudo-candidate plus a trailing actual-ballots column. All writes
go through a temp file and rename so a crash never leaves a torn file.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable

from .errors import AccountingMismatch
from .model import Candidate, ContestSpec, PooledContest, Precinct, validate_contest
from .discrepancy import HandTally
from .protocol import AuditSession, canonical_json

CONTEST_SCHEMA = "contest/1"

# The reserved CSV column name that marks a write-in pool; every other
# candidate column is a listed candidate.
WRITE_IN_COLUMN = "Write-ins"

_CSV_PREFIX = ("precinct_id", "county_id", "ballots", "invalid", "undervotes")


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def contest_to_dict(spec: ContestSpec) -> dict:
    return {
        "schema": CONTEST_SCHEMA,
        "contest_id": spec.contest_id,
        "f": spec.f,
        "candidates": [{"name": c.name, "kind": c.kind} for c in spec.candidates],
        "precincts": [
            {
                "precinct_id": pr.precinct_id,
                "county_id": pr.county_id,
                "reported_votes": list(pr.reported_votes),
                "reported_undervotes": pr.reported_undervotes,
                "reported_invalid_ballots": pr.reported_invalid_ballots,
                "reported_ballots": pr.reported_ballots,
                **({"vote_cap": pr.vote_cap} if pr.vote_cap is not None else {}),
            }
            for pr in spec.precincts
        ],
    }


def contest_from_dict(d: dict) -> ContestSpec:
    if d.get("schema") != CONTEST_SCHEMA:
        raise AccountingMismatch(f"unknown contest schema {d.get('schema')!r}")
    spec = ContestSpec(
        contest_id=d["contest_id"],
        f=int(d["f"]),
        candidates=tuple(Candidate(c["name"], c["kind"]) for c in d["candidates"]),
        precincts=tuple(
            Precinct(
                precinct_id=pr["precinct_id"],
                county_id=pr["county_id"],
                reported_votes=tuple(int(v) for v in pr["reported_votes"]),
                reported_undervotes=int(pr["reported_undervotes"]),
                reported_invalid_ballots=int(pr["reported_invalid_ballots"]),
                reported_ballots=int(pr["reported_ballots"]),
                vote_cap=int(pr["vote_cap"]) if pr.get("vote_cap") is not None else None,
            )
            for pr in d["precincts"]
        ),
    )
    return validate_contest(spec)


def contest_to_csv(spec: ContestSpec) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(list(_CSV_PREFIX) + [c.name for c in spec.candidates])
    for pr in spec.precincts:
        writer.writerow(
            [
                pr.precinct_id,
                pr.county_id,
                pr.reported_ballots,
                pr.reported_invalid_ballots,
                pr.reported_undervotes,
            ]
            + list(pr.reported_votes)
        )
    return out.getvalue()


def contest_from_csv(text: str, *, contest_id: str, f: int = 1) -> ContestSpec:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise AccountingMismatch("empty contest CSV")
    header = [h.strip() for h in rows[0]]
    if tuple(header[: len(_CSV_PREFIX)]) != _CSV_PREFIX:
        raise AccountingMismatch(
            f"contest CSV must start with columns {', '.join(_CSV_PREFIX)}"
        )
    names = header[len(_CSV_PREFIX) :]
    if not names:
        raise AccountingMismatch("contest CSV names no candidates")
    candidates = tuple(
        Candidate(n, "write-in" if n == WRITE_IN_COLUMN else "listed") for n in names
    )
    precincts = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise AccountingMismatch(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            ballots, invalid, under = (int(row[2]), int(row[3]), int(row[4]))
            votes = tuple(int(v) for v in row[len(_CSV_PREFIX) :])
        except ValueError as exc:
            raise AccountingMismatch(f"line {lineno}: {exc}") from None
        precincts.append(
            Precinct(
                precinct_id=row[0].strip(),
                county_id=row[1].strip(),
                reported_votes=votes,
                reported_undervotes=under,
                reported_invalid_ballots=invalid,
                reported_ballots=ballots,
            )
        )
    return validate_contest(ContestSpec(contest_id, f, candidates, tuple(precincts)))


def load_contest(path: str | Path, *, f: int = 1, contest_id: str | None = None) -> ContestSpec:
    """Read a contest from JSON or CSV, judged by suffix.

    For CSV, contest_id defaults to the file stem and f to the given value;
    JSON documents carry both themselves.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        return contest_from_dict(json.loads(text))
    return contest_from_csv(text, contest_id=contest_id or path.stem, f=f)


def save_contest(path: str | Path, spec: ContestSpec) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        atomic_write_text(path, json.dumps(contest_to_dict(spec), indent=2) + "\n")
    else:
        atomic_write_text(path, contest_to_csv(spec))


def tallies_to_csv(pooled: PooledContest, tallies: Iterable[HandTally]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["precinct_id"] + [pc.name for pc in pooled.pseudo] + ["ballots"])
    for t in tallies:
        writer.writerow([t.precinct_id] + list(t.actual_votes) + [t.actual_ballots])
    return out.getvalue()


def tallies_from_csv(pooled: PooledContest, text: str) -> list[HandTally]:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise AccountingMismatch("empty tally CSV")
    expected = ["precinct_id"] + [pc.name for pc in pooled.pseudo] + ["ballots"]
    header = [h.strip() for h in rows[0]]
    if header != expected:
        raise AccountingMismatch(
            f"tally CSV columns must be exactly: {', '.join(expected)}"
        )
    tallies = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(expected):
            raise AccountingMismatch(f"line {lineno}: expected {len(expected)} fields")
        try:
            votes = tuple(int(v) for v in row[1:-1])
            ballots = int(row[-1])
        except ValueError as exc:
            raise AccountingMismatch(f"line {lineno}: {exc}") from None
        tallies.append(HandTally(row[0].strip(), votes, ballots))
    return tallies


def save_session(path: str | Path, session: AuditSession) -> None:
    atomic_write_text(path, canonical_json(session.to_dict()) + "\n")


def load_session(path: str | Path) -> AuditSession:
    return AuditSession.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
