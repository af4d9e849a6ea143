"""Contest files, exact renderings, the command line, and the HTTP service."""

import json
from fractions import Fraction
from pathlib import Path

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from electaudit.cli import main
from electaudit.contest_io import (
    contest_from_csv,
    contest_from_dict,
    contest_to_csv,
    contest_to_dict,
    load_contest,
    load_session,
    save_contest,
    save_session,
    tallies_from_csv,
    tallies_to_csv,
)
from electaudit.discrepancy import HandTally
from electaudit.errors import AccountingMismatch
from electaudit.exact import decimal_string, parse_ratio, percent_string, ratio_json
from electaudit.service import create_app

DATA = Path(__file__).resolve().parent.parent / "data"
TALLY_3107 = (
    "precinct_id,Thornton,Hoyt,Trotter,Stratigos,Romanowsky+Write-ins,"
    "undervotes/invalid,ballots\n"
    "3107,251,260,235,214,56,732,583\n"
)


# ---------------------------------------------------------------- exact forms


def test_parse_ratio_accepts_exact_spellings():
    assert parse_ratio("0.1") == Fraction(1, 10)
    assert parse_ratio("1/3") == Fraction(1, 3)
    assert parse_ratio(2) == 2
    assert parse_ratio(Fraction(2, 7)) == Fraction(2, 7)
    with pytest.raises(TypeError):
        parse_ratio(0.5)  # floats carry binary rounding; refuse them


def test_rendering_rounds_half_even():
    assert decimal_string(Fraction(8, 9)) == "0.8889"
    assert percent_string(Fraction(8, 9)) == "88.9%"
    assert percent_string(Fraction(0)) == "0%"
    assert ratio_json(Fraction(8, 9)) == {
        "numerator": "8",
        "denominator": "9",
        "decimal": "0.8889",
        "percent": "88.9%",
    }


# --------------------------------------------------------------- contest I/O


def test_json_roundtrip(sausalito):
    doc = contest_to_dict(sausalito)
    assert doc["schema"] == "contest/1"
    again = contest_from_dict(doc)
    assert contest_to_dict(again) == doc


def test_csv_roundtrip(sausalito):
    text = contest_to_csv(sausalito)
    again = contest_from_csv(text, contest_id=sausalito.contest_id, f=3)
    assert contest_to_csv(again) == text
    assert contest_to_dict(again) == contest_to_dict(sausalito)


def test_csv_matches_shipped_file(sausalito):
    shipped = (DATA / "sausalito_2006.csv").read_text()
    parsed = contest_from_csv(shipped, contest_id=sausalito.contest_id, f=3)
    assert contest_to_dict(parsed) == contest_to_dict(sausalito)


def test_csv_error_carries_line_number():
    text = "precinct_id,county_id,ballots,invalid,undervotes,A,B\np1,x,10,0,3,four,11\n"
    with pytest.raises(AccountingMismatch) as err:
        contest_from_csv(text, contest_id="bad")
    assert "line 2" in str(err.value)


def test_csv_rejects_foreign_header():
    with pytest.raises(AccountingMismatch):
        contest_from_csv("id,county,votes\np1,x,3\n", contest_id="bad")


def test_load_contest_judges_suffix(tmp_path, sausalito):
    p = tmp_path / "contest.json"
    save_contest(p, sausalito)
    assert contest_to_dict(load_contest(p)) == contest_to_dict(sausalito)
    c = tmp_path / "contest.csv"
    save_contest(c, sausalito)
    roundtrip = load_contest(c, f=3, contest_id=sausalito.contest_id)
    assert contest_to_dict(roundtrip) == contest_to_dict(sausalito)


def test_tally_csv_roundtrip(sausalito_grouped):
    tallies = tallies_from_csv(sausalito_grouped, TALLY_3107)
    assert tallies == [HandTally("3107", (251, 260, 235, 214, 56, 732), 583)]
    assert tallies_to_csv(sausalito_grouped, tallies).replace("\r\n", "\n") == TALLY_3107


def test_tally_csv_requires_pseudo_candidate_header(sausalito_grouped):
    with pytest.raises(AccountingMismatch):
        tallies_from_csv(sausalito_grouped, "precinct_id,A,B,ballots\n3107,1,2,3\n")


# ------------------------------------------------------------------ the CLI


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(main, list(args), catch_exceptions=False)


def test_plan_full_audit_needed(runner):
    res = invoke(
        runner,
        "plan",
        str(DATA / "sausalito_2006.json"),
        "--alpha",
        "0.01",
        "--threshold",
        "0.002",
    )
    assert res.exit_code == 0
    assert "n1 = 9 of 9" in res.output


def test_plan_single_precinct_suffices(runner):
    res = invoke(
        runner,
        "plan",
        str(DATA / "sausalito_2006.json"),
        "--alpha",
        "0.9",
        "--threshold",
        "0.00057",
    )
    assert res.exit_code == 0
    assert "n1 = 1 of 9" in res.output
    assert "margin 86" in res.output.replace("=", " ").lower() or "86" in res.output


def test_pvalue_direct_triples(runner):
    res = invoke(
        runner, "pvalue", "--q", "3993", "--n", "78", "--N", "4123", "--mode", "with-replacement"
    )
    assert res.exit_code == 0
    assert "P = 0.08217 (8.22%)" in res.output
    res = invoke(
        runner, "pvalue", "--q", "3402", "--n", "78", "--N", "4123", "--mode", "with-replacement"
    )
    assert "0.0000308%" in res.output


def test_pvalue_json_is_exact(runner):
    res = invoke(runner, "pvalue", "--q", "8", "--n", "1", "--N", "9", "--json")
    doc = json.loads(res.output)
    assert doc["rows"][0]["p_value"] == ratio_json(Fraction(8, 9))
    assert doc["rows"][0]["q"] == 8


def test_pvalue_from_contest_and_tallies(runner, tmp_path):
    tally_file = tmp_path / "t.csv"
    tally_file.write_text(TALLY_3107)
    res = invoke(
        runner,
        "pvalue",
        "--contest",
        str(DATA / "sausalito_2006.json"),
        "--tallies",
        str(tally_file),
        "--json",
    )
    assert res.exit_code == 0, res.output
    doc = json.loads(res.output)
    assert doc["rows"][0]["n"] == 1
    assert doc["rows"][0]["p_value"]["numerator"] == "8"
    assert doc["rows"][0]["p_value"]["denominator"] == "9"


def test_session_flow_end_to_end(runner, tmp_path):
    state = tmp_path / "session.json"
    tally_file = tmp_path / "t.csv"
    tally_file.write_text(TALLY_3107)

    res = invoke(
        runner,
        "run",
        "create",
        str(state),
        "--contest",
        str(DATA / "sausalito_2006.json"),
        "--alpha",
        "0.1",
        "--seed",
        "9",
        "--initial-n",
        "1",
    )
    assert res.exit_code == 0, res.output

    res = invoke(runner, "run", "draw", str(state))
    assert res.exit_code == 0
    assert "3107" in res.output

    res = invoke(runner, "run", "record", str(state), "--tallies", str(tally_file))
    assert res.exit_code == 0
    assert "3107: overstatement 1" in res.output

    res = invoke(runner, "run", "evaluate", str(state))
    assert res.exit_code == 0
    assert "Escalate" in res.output
    assert "8/9 (88.9%)" in res.output

    res = invoke(runner, "run", "report", str(state))
    assert res.exit_code == 0
    assert "event log hash:" in res.output

    res = invoke(runner, "run", "report", str(state), "--json")
    doc = json.loads(res.output)
    assert doc["stages"][0]["decision"] == "escalate"

    # the state file on disk is a loadable session
    sess = load_session(state)
    assert sess.status == "open"
    save_session(tmp_path / "copy.json", sess)
    assert json.loads((tmp_path / "copy.json").read_text())["events"]


def test_domain_errors_exit_one(runner, tmp_path):
    state = tmp_path / "session.json"
    invoke(
        runner,
        "run",
        "create",
        str(state),
        "--contest",
        str(DATA / "sausalito_2006.json"),
        "--alpha",
        "0.1",
        "--seed",
        "9",
        "--initial-n",
        "1",
    )
    res = runner.invoke(main, ["run", "evaluate", str(state)])
    assert res.exit_code == 1
    assert "MissingTallies" in res.output


def test_usage_errors_exit_two(runner):
    res = runner.invoke(main, ["pvalue", "--mode", "sideways"])
    assert res.exit_code == 2


# -------------------------------------------------------------- the service


@pytest.fixture()
def client(tmp_path):
    app = create_app(tmp_path / "state")
    with TestClient(app) as c:
        yield c


@pytest.fixture()
def seeded_client(client, sausalito):
    client.post("/contests", json=contest_to_dict(sausalito))
    client.post(
        "/sessions",
        json={
            "contest_id": "sausalito-2006-school-board",
            "alpha": "0.1",
            "seed": 9,
            "initial_n": 1,
        },
    )
    return client


def test_contest_endpoints(client, sausalito):
    res = client.post("/contests", json=contest_to_dict(sausalito))
    assert res.status_code == 200
    body = res.json()
    assert body["margin"] == 86
    assert body["winners"] == ["Thornton", "Hoyt", "Trotter"]
    assert client.get("/contests/sausalito-2006-school-board").json()["f"] == 3
    assert client.get("/contests/missing").status_code == 404


def test_session_lifecycle_over_http(seeded_client):
    sid = "sausalito-2006-school-board:9"
    drawn = seeded_client.post(f"/sessions/{sid}/draw").json()["drawn"]
    assert drawn == ["3107"]

    res = seeded_client.post(
        f"/sessions/{sid}/tallies",
        json={
            "tallies": [
                {
                    "precinct_id": "3107",
                    "actual_votes": [251, 260, 235, 214, 56, 732],
                    "actual_ballots": 583,
                }
            ]
        },
    )
    assert res.json()["overstatements"] == {"3107": 1}

    rec = seeded_client.post(f"/sessions/{sid}/evaluate").json()["stage_record"]
    assert rec["decision"] == "escalate"
    assert rec["p_value"] == ratio_json(Fraction(8, 9))

    view = seeded_client.get(f"/sessions/{sid}").json()
    assert view["sample"] == [
        {"precinct_id": "3107", "stage_drawn": 1, "tallied": True, "overstatement": 1}
    ]

    text = seeded_client.get(f"/sessions/{sid}/report?format=text").text
    assert "8/9 (88.9%)" in text


def test_service_error_codes(seeded_client):
    sid = "sausalito-2006-school-board:9"
    assert seeded_client.get("/sessions/nope").status_code == 404
    dup = seeded_client.post(
        "/sessions",
        json={
            "contest_id": "sausalito-2006-school-board",
            "alpha": "0.1",
            "seed": 9,
            "initial_n": 1,
        },
    )
    assert dup.status_code == 409
    seeded_client.post(f"/sessions/{sid}/draw")
    bad = seeded_client.post(
        f"/sessions/{sid}/tallies",
        json={"tallies": [{"precinct_id": "3001", "actual_votes": [0] * 6, "actual_ballots": 0}]},
    )
    assert bad.status_code == 400
    assert bad.json()["error"] == "NotInSample"
    weird = seeded_client.post(f"/sessions/{sid}/tallies", json={"tallies": [{"bogus": 1}]})
    assert weird.status_code == 400


def test_what_if_does_not_mutate_session(seeded_client):
    sid = "sausalito-2006-school-board:9"
    seeded_client.post(f"/sessions/{sid}/draw")
    before = seeded_client.get(f"/sessions/{sid}").json()["event_log_hash"]
    ghost = seeded_client.post(
        f"/sessions/{sid}/what-if",
        json={
            "tallies": [
                {
                    "precinct_id": "3107",
                    "actual_votes": [251, 260, 235, 214, 56, 732],
                    "actual_ballots": 583,
                }
            ]
        },
    )
    assert ghost.status_code == 200
    assert ghost.json()["projection"] is True
    assert ghost.json()["p_value"] == ratio_json(Fraction(8, 9))
    assert seeded_client.get(f"/sessions/{sid}").json()["event_log_hash"] == before


def test_cli_and_service_agree_numerically(runner, seeded_client, tmp_path):
    sid = "sausalito-2006-school-board:9"
    seeded_client.post(f"/sessions/{sid}/draw")
    seeded_client.post(
        f"/sessions/{sid}/tallies",
        json={
            "tallies": [
                {
                    "precinct_id": "3107",
                    "actual_votes": [251, 260, 235, 214, 56, 732],
                    "actual_ballots": 583,
                }
            ]
        },
    )
    http_p = seeded_client.post(f"/sessions/{sid}/evaluate").json()["stage_record"]["p_value"]

    state = tmp_path / "session.json"
    tally_file = tmp_path / "t.csv"
    tally_file.write_text(TALLY_3107)
    invoke(
        runner,
        "run",
        "create",
        str(state),
        "--contest",
        str(DATA / "sausalito_2006.json"),
        "--alpha",
        "0.1",
        "--seed",
        "9",
        "--initial-n",
        "1",
    )
    invoke(runner, "run", "draw", str(state))
    invoke(runner, "run", "record", str(state), "--tallies", str(tally_file))
    invoke(runner, "run", "evaluate", str(state))
    res = invoke(runner, "run", "report", str(state), "--json")
    cli_p = json.loads(res.output)["stages"][0]["p_value"]
    assert cli_p == http_p == ratio_json(Fraction(8, 9))
