import { ApiError, AuditApi } from "./api.js";
import type {
  CreateSessionRequest,
  HandTallyInput,
  Projection,
  SessionView,
} from "./types.js";
import type { ConsoleState, RowState } from "./view.js";

export type Listener = (state: ConsoleState) => void;

/** Drives one audit session: draws, tally entry with optimistic rows,
 * what-if projections, and conflict recovery. All numbers stay inside the
 * `SessionView` payloads; the controller only moves them around. */
export class SessionController {
  private view: SessionView | null = null;
  private rowStates = new Map<string, RowState>();
  private projection: Projection | null = null;
  private projectionError: string | null = null;
  private toast: string | null = null;

  constructor(
    private readonly api: AuditApi,
    private readonly sessionId: string,
    private readonly listener: Listener = () => {},
  ) {}

  get state(): ConsoleState {
    return {
      view: this.view,
      rowStates: this.rowStates,
      projection: this.projection,
      projectionError: this.projectionError,
      toast: this.toast,
    };
  }

  private emit(): void {
    this.listener(this.state);
  }

  private adopt(view: SessionView): void {
    this.view = view;
    this.emit();
  }

  /** Create the session, or refetch it when another tab beat us to it. */
  async openOrCreate(req: CreateSessionRequest): Promise<void> {
    try {
      this.adopt(await this.api.createSession(req));
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.toast = err.detail;
        this.adopt(await this.api.getSession(this.sessionId));
        return;
      }
      throw err;
    }
  }

  async refresh(): Promise<void> {
    this.adopt(await this.api.getSession(this.sessionId));
  }

  async draw(): Promise<string[]> {
    const res = await this.api.draw(this.sessionId);
    this.adopt(res);
    return res.drawn;
  }

  /** Tally entry. Blank fields never reach the service; a rejected tally
   * becomes an inline row error and the optimistic mark is rolled back. */
  async submitTally(
    precinctId: string,
    votes: Array<number | null>,
    ballots: number | null,
  ): Promise<boolean> {
    if (votes.some((v) => v === null) || ballots === null) {
      this.rowStates.set(precinctId, { error: "every count is required" });
      this.emit();
      return false;
    }
    this.rowStates.set(precinctId, { pending: true });
    this.emit();
    const tally: HandTallyInput = {
      precinct_id: precinctId,
      actual_votes: votes as number[],
      actual_ballots: ballots,
    };
    try {
      const res = await this.api.recordTallies(this.sessionId, [tally]);
      this.rowStates.delete(precinctId);
      this.adopt(res);
      return true;
    } catch (err) {
      if (err instanceof ApiError) {
        this.rowStates.set(precinctId, { error: err.detail });
        this.emit();
        return false;
      }
      this.rowStates.delete(precinctId);
      throw err;
    }
  }

  async evaluate(): Promise<void> {
    this.adopt(await this.api.evaluate(this.sessionId));
  }

  /** Projections never touch the committed session state. */
  async whatIfSampleSize(sampleSize: number): Promise<void> {
    try {
      this.projection = await this.api.whatIfSampleSize(
        this.sessionId,
        sampleSize,
      );
      this.projectionError = null;
    } catch (err) {
      if (!(err instanceof ApiError)) throw err;
      this.projection = null;
      this.projectionError = err.detail;
    }
    this.emit();
  }

  async whatIfTallies(tallies: HandTallyInput[]): Promise<void> {
    try {
      this.projection = await this.api.whatIfTallies(this.sessionId, tallies);
      this.projectionError = null;
    } catch (err) {
      if (!(err instanceof ApiError)) throw err;
      this.projection = null;
      this.projectionError = err.detail;
    }
    this.emit();
  }
}
