// Recorded service payloads (scripts/record_ui_fixtures.py in the parent
// repository). Tests replay these so no running service is needed and every
// asserted number is a real service value.

import { readFileSync } from "node:fs";

import type {
  ContestSummary,
  DrawResponse,
  EvaluateResponse,
  Projection,
  SessionView,
  TalliesResponse,
} from "../src/types.js";

export interface RecordedError {
  status: number;
  body: { error?: string; detail: string };
}

export interface Fixture {
  contest_summary: ContestSummary;
  escalating: {
    created: SessionView;
    draw: DrawResponse;
    tallies: TalliesResponse;
    evaluated: EvaluateResponse;
    view: SessionView;
  };
  confirmed: { view: SessionView };
  what_if: {
    tallies_ok: Projection;
    sample_size_ok: Projection;
    sample_size_too_large: RecordedError;
  };
  errors: {
    not_in_sample: RecordedError;
    duplicate_session: RecordedError;
  };
}

export const fixture: Fixture = JSON.parse(
  readFileSync(
    new URL("../fixtures/sausalito-session.json", import.meta.url),
    "utf8",
  ),
);

export const SESSION_ID = fixture.escalating.view.session_id;

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export interface FakeService {
  fetch: (input: string, init?: RequestInit) => Promise<Response>;
  calls: string[];
  /** Routes that may change session state, as actually invoked. */
  mutations: string[];
}

/** In-memory stand-in for the audit service, faithful to the recorded
 * payloads: what-if never advances the stored view, tallies and draw do. */
export function fakeService(): FakeService {
  const f = fixture;
  let view: SessionView = f.escalating.view;
  const calls: string[] = [];
  const mutations: string[] = [];

  async function handle(input: string, init?: RequestInit): Promise<Response> {
    const method = init?.method ?? "GET";
    const path = decodeURIComponent(new URL(input, "http://fake").pathname);
    calls.push(`${method} ${path}`);
    const body = init?.body ? JSON.parse(String(init.body)) : null;

    if (method === "POST" && path === "/sessions") {
      return json(
        f.errors.duplicate_session.status,
        f.errors.duplicate_session.body,
      );
    }
    if (path === `/sessions/${SESSION_ID}`) {
      return json(200, view);
    }
    if (path === `/sessions/${SESSION_ID}/what-if`) {
      if ("sample_size" in body) {
        if (body.sample_size > view.N) {
          return json(
            f.what_if.sample_size_too_large.status,
            f.what_if.sample_size_too_large.body,
          );
        }
        return json(200, f.what_if.sample_size_ok);
      }
      return json(200, f.what_if.tallies_ok);
    }
    if (path === `/sessions/${SESSION_ID}/tallies`) {
      mutations.push(path);
      const pid = body.tallies[0].precinct_id;
      if (pid !== "3107") {
        return json(f.errors.not_in_sample.status, f.errors.not_in_sample.body);
      }
      view = f.escalating.tallies;
      return json(200, f.escalating.tallies);
    }
    if (path === `/sessions/${SESSION_ID}/draw`) {
      mutations.push(path);
      view = f.escalating.draw;
      return json(200, f.escalating.draw);
    }
    if (path === `/sessions/${SESSION_ID}/evaluate`) {
      mutations.push(path);
      view = f.escalating.evaluated;
      return json(200, f.escalating.evaluated);
    }
    return json(404, { detail: `no route for ${method} ${path}` });
  }

  return { fetch: handle, calls, mutations };
}
