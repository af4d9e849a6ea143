import type {
  ContestSummary,
  CreateSessionRequest,
  DrawResponse,
  EvaluateResponse,
  HandTallyInput,
  Projection,
  SessionView,
  TalliesResponse,
} from "./types.js";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

/** Service-reported failure: `code` is the domain error name when the body
 * carries one ("NotInSample", ...), else a label for the HTTP status. */
export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: string;

  constructor(status: number, code: string, detail: string) {
    super(`${code}: ${detail}`);
    this.status = status;
    this.code = code;
    this.detail = detail;
  }
}

const STATUS_LABELS: Record<number, string> = {
  404: "NotFound",
  409: "Conflict",
};

export class AuditApi {
  private readonly fetchImpl: FetchLike;

  constructor(
    private readonly base: string = "",
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchImpl(this.base + path, init);
    const payload: unknown = await res.json().catch(() => null);
    if (!res.ok) {
      const doc = (payload ?? {}) as { error?: string; detail?: string };
      throw new ApiError(
        res.status,
        doc.error ?? STATUS_LABELS[res.status] ?? `Http${res.status}`,
        doc.detail ?? res.statusText,
      );
    }
    return payload as T;
  }

  registerContest(doc: unknown): Promise<ContestSummary> {
    return this.request("POST", "/contests", doc);
  }

  getContest(contestId: string): Promise<unknown> {
    return this.request("GET", `/contests/${encodeURIComponent(contestId)}`);
  }

  createSession(req: CreateSessionRequest): Promise<SessionView> {
    return this.request("POST", "/sessions", req);
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}`);
  }

  draw(sessionId: string): Promise<DrawResponse> {
    return this.request(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/draw`,
    );
  }

  recordTallies(
    sessionId: string,
    tallies: HandTallyInput[],
  ): Promise<TalliesResponse> {
    return this.request(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/tallies`,
      { tallies },
    );
  }

  evaluate(sessionId: string): Promise<EvaluateResponse> {
    return this.request(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/evaluate`,
    );
  }

  whatIfTallies(
    sessionId: string,
    tallies: HandTallyInput[],
  ): Promise<Projection> {
    return this.request(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/what-if`,
      { tallies },
    );
  }

  whatIfSampleSize(sessionId: string, sampleSize: number): Promise<Projection> {
    return this.request(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/what-if`,
      { sample_size: sampleSize },
    );
  }

  async reportText(sessionId: string): Promise<string> {
    const res = await this.fetchImpl(
      `${this.base}/sessions/${encodeURIComponent(sessionId)}/report?format=text`,
      { method: "GET" },
    );
    if (!res.ok) {
      throw new ApiError(res.status, `Http${res.status}`, res.statusText);
    }
    return res.text();
  }
}
