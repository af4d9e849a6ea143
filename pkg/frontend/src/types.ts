// Wire types mirroring the audit service's JSON payloads. The console never
// recomputes any of these values; it renders the strings the service sends.

/** Exact rational as the service serializes it; all fields are strings. */
export interface Ratio {
  numerator: string;
  denominator: string;
  decimal: string;
  percent: string;
}

export interface PseudoCandidate {
  name: string;
  total: number;
  members: number[];
  includes_bucket: boolean;
  role: "winner" | "loser";
}

export type Decision = "confirmed" | "escalate" | "full_count_required";

export interface StageRecord {
  stage: number;
  n: number;
  alpha_s: Ratio;
  statistic: Ratio;
  p_value: Ratio;
  decision: Decision;
  detail: Record<string, unknown>;
}

export interface SampleEntry {
  precinct_id: string;
  stage_drawn: number;
  tallied: boolean;
  overstatement: number | null;
}

export type SessionStatus =
  | "open"
  | "confirmed"
  | "full_count_required"
  | "full_count_complete";

export interface SessionView {
  schema: string;
  session_id: string;
  contest_id: string;
  status: SessionStatus;
  margin: number;
  alpha: Ratio;
  alpha_rule: { kind: string; stages: number | null };
  escalation: { kind: string; increment: number | null };
  design: { kind: string; seed: number };
  weight: string;
  bound_method: string;
  pooling_rule: string;
  pseudo_candidates: PseudoCandidate[];
  N: number;
  stage: number;
  sample_by_stage: string[][];
  stages: StageRecord[];
  hand_count_winners: string[] | null;
  caveat: string;
  event_log_hash: string;
  sample: SampleEntry[];
  target: number | Record<string, number>;
  alpha_s: Ratio;
  latest: StageRecord | null;
}

export interface ContestSummary {
  contest_id: string;
  N: number;
  ballots: number;
  opportunities: number;
  winners: string[];
  margin: number;
}

export interface HandTallyInput {
  precinct_id: string;
  actual_votes: number[];
  actual_ballots: number;
}

export interface CreateSessionRequest {
  contest_id: string;
  alpha: string;
  seed: number;
  initial_n: number | Record<string, number>;
  session_id?: string;
  pooling?: string;
  bound?: string;
  weight?: string;
  design?: string;
  alpha_rule?: { kind: string; stages?: number };
  escalation?: { kind: string; increment?: number };
}

/** POST /what-if response; a stage record or sample-size projection. */
export interface Projection {
  projection: true;
  stage?: number;
  n?: number;
  alpha_s: Ratio;
  statistic: Ratio;
  p_value: Ratio;
  decision?: Decision;
  would_confirm?: boolean;
}

export type DrawResponse = SessionView & { drawn: string[] };
export type TalliesResponse = SessionView & {
  overstatements: Record<string, number>;
};
export type EvaluateResponse = SessionView & { stage_record: StageRecord };
