import { describe, expect, it } from "vitest";

import { ApiError, AuditApi, type FetchLike } from "../src/api.js";
import { fixture, SESSION_ID } from "./fixture.js";

interface Seen {
  url: string;
  method: string;
  body: unknown;
}

function canned(status: number, body: unknown, seen: Seen[]): FetchLike {
  return async (url, init) => {
    seen.push({
      url,
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(String(init.body)) : null,
    });
    return new Response(JSON.stringify(body), {
      status,
      headers: { "content-type": "application/json" },
    });
  };
}

describe("request shapes", () => {
  it("posts tallies under the session path", async () => {
    const seen: Seen[] = [];
    const api = new AuditApi("http://svc", canned(200, fixture.escalating.tallies, seen));
    await api.recordTallies(SESSION_ID, [
      { precinct_id: "3107", actual_votes: [1], actual_ballots: 1 },
    ]);
    expect(seen[0]).toMatchObject({
      url: `http://svc/sessions/${encodeURIComponent(SESSION_ID)}/tallies`,
      method: "POST",
    });
    expect((seen[0]!.body as { tallies: unknown[] }).tallies).toHaveLength(1);
  });

  it("distinguishes the two what-if payloads", async () => {
    const seen: Seen[] = [];
    const api = new AuditApi("", canned(200, fixture.what_if.sample_size_ok, seen));
    await api.whatIfSampleSize(SESSION_ID, 9);
    await api.whatIfTallies(SESSION_ID, []);
    expect(seen[0]!.body).toEqual({ sample_size: 9 });
    expect(seen[1]!.body).toEqual({ tallies: [] });
  });
});

describe("error mapping", () => {
  it("carries the domain error name from the body", async () => {
    const err = fixture.errors.not_in_sample;
    const api = new AuditApi("", canned(err.status, err.body, []));
    await expect(api.recordTallies(SESSION_ID, [])).rejects.toMatchObject({
      status: 400,
      code: "NotInSample",
      detail: "precinct '3001' was never drawn",
    });
  });

  it("labels bare HTTP conflicts", async () => {
    const dup = fixture.errors.duplicate_session;
    const api = new AuditApi("", canned(dup.status, dup.body, []));
    const failure = api.createSession({
      contest_id: "x",
      alpha: "0.1",
      seed: 9,
      initial_n: 1,
    });
    await expect(failure).rejects.toSatisfy(
      (e: unknown) =>
        e instanceof ApiError && e.status === 409 && e.code === "Conflict",
    );
  });

  it("survives non-JSON error bodies", async () => {
    const fetchImpl: FetchLike = async () =>
      new Response("bad gateway", { status: 502, statusText: "Bad Gateway" });
    const api = new AuditApi("", fetchImpl);
    await expect(api.getSession("s")).rejects.toMatchObject({
      status: 502,
      code: "Http502",
    });
  });
});
