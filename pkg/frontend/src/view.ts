// HTML renderers for the console. Pure string-in, string-out so the unit
// tests can run against recorded service fixtures without a DOM.
//
// Every figure below is a verbatim service string; the only formatting this
// module does is concatenation.

import type {
  Projection,
  Ratio,
  SampleEntry,
  SessionView,
  StageRecord,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** "8/9 (88.9%)" straight from the service's exact-rational fields. */
export function ratioText(r: Ratio): string {
  return `${r.numerator}/${r.denominator} (${r.percent})`;
}

export interface RowState {
  error?: string;
  pending?: boolean;
}

export function contestHeader(view: SessionView): string {
  const winners = view.pseudo_candidates
    .filter((c) => c.role === "winner")
    .map((c) => escapeHtml(c.name))
    .join(", ");
  const groups = view.pseudo_candidates
    .map((c) => `${escapeHtml(c.name)} ${c.total}`)
    .join(" · ");
  return [
    `<header class="session-header">`,
    `<h1>${escapeHtml(view.contest_id)}</h1>`,
    `<p>session <code>${escapeHtml(view.session_id)}</code>`,
    ` · margin <strong>${view.margin}</strong> votes`,
    ` · apparent winners ${winners}</p>`,
    `<p class="pooling">pooling ${escapeHtml(view.pooling_rule)}: ${groups}</p>`,
    `<p class="rules">risk limit ${view.alpha.percent} (${escapeHtml(view.alpha_rule.kind)})`,
    ` · bound ${escapeHtml(view.bound_method)} · weight ${escapeHtml(view.weight)}`,
    ` · seed ${view.design.seed}</p>`,
    `</header>`,
  ].join("");
}

export function decisionBanner(view: SessionView): string {
  const latest = view.latest;
  const seed = `seed ${view.design.seed}`;
  if (view.status === "confirmed" && latest) {
    return (
      `<div class="banner confirmed" role="status">Confirmed: stage P-value ` +
      `${ratioText(latest.p_value)} &le; alpha_s ${ratioText(latest.alpha_s)} · ${seed}</div>`
    );
  }
  if (view.status === "full_count_required" || view.status === "full_count_complete") {
    const winners = view.hand_count_winners
      ? ` · hand-count winners: ${view.hand_count_winners.map(escapeHtml).join(", ")}`
      : "";
    return (
      `<div class="banner full-count" role="status">Full hand count` +
      `${view.status === "full_count_complete" ? " complete" : " required"}` +
      `${winners} · ${seed}</div>`
    );
  }
  if (latest && latest.decision === "escalate") {
    return (
      `<div class="banner escalate" role="status">Escalate: stage P-value ` +
      `${ratioText(latest.p_value)} &gt; alpha_s ${ratioText(latest.alpha_s)} · ${seed}</div>`
    );
  }
  return (
    `<div class="banner open" role="status">Stage ${view.stage} open: ` +
    `alpha_s ${ratioText(view.alpha_s)} · ${seed}</div>`
  );
}

export function stageTable(stages: StageRecord[]): string {
  if (stages.length === 0) {
    return `<p class="empty">No stages evaluated yet.</p>`;
  }
  const rows = stages
    .map(
      (s) =>
        `<tr><td>${s.stage}</td><td>${s.n}</td>` +
        `<td>${ratioText(s.alpha_s)}</td>` +
        `<td>${ratioText(s.statistic)}</td>` +
        `<td class="pvalue">${ratioText(s.p_value)}</td>` +
        `<td>${escapeHtml(s.decision)}</td></tr>`,
    )
    .join("");
  return (
    `<table class="stages"><thead><tr><th>stage</th><th>n</th><th>alpha_s</th>` +
    `<th>statistic</th><th>P-value</th><th>decision</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

function sampleRow(entry: SampleEntry, state: RowState): string {
  const pid = escapeHtml(entry.precinct_id);
  let status: string;
  if (state.pending) {
    status = `<em class="pending">recording…</em>`;
  } else if (entry.tallied) {
    status = `tallied · overstatement ${entry.overstatement}`;
  } else {
    status = `<button type="button" data-tally="${pid}">enter tally</button>`;
  }
  const error = state.error
    ? `<span class="field-error">${escapeHtml(state.error)}</span>`
    : "";
  return (
    `<tr data-precinct="${pid}"><td>${pid}</td>` +
    `<td>stage ${entry.stage_drawn}</td><td>${status}${error}</td></tr>`
  );
}

export function sampleChecklist(
  view: SessionView,
  rowStates: ReadonlyMap<string, RowState> = new Map(),
): string {
  const target =
    typeof view.target === "number"
      ? `${view.target}`
      : Object.entries(view.target)
          .map(([county, n]) => `${escapeHtml(county)}: ${n}`)
          .join(", ");
  const rows = view.sample
    .map((entry) =>
      sampleRow(entry, rowStates.get(entry.precinct_id) ?? {}),
    )
    .join("");
  return (
    `<section class="sample"><h2>Sampled precincts ` +
    `(${view.sample.length} drawn, target ${target} of ${view.N})</h2>` +
    `<table><tbody>${rows}</tbody></table></section>`
  );
}

export function whatIfPanel(
  projection: Projection | null,
  error: string | null,
): string {
  if (error) {
    return `<section class="what-if"><p class="error">${escapeHtml(error)}</p></section>`;
  }
  if (!projection) {
    return `<section class="what-if"><p class="empty">No projection run.</p></section>`;
  }
  const confirms =
    projection.would_confirm ?? projection.decision === "confirmed";
  const outcome = confirms ? "would confirm" : "would escalate";
  const size = projection.n !== undefined ? ` at n = ${projection.n}` : "";
  return (
    `<section class="what-if"><h2>Projection (not recorded)</h2>` +
    `<p>${outcome}${size}: P-value ${ratioText(projection.p_value)} vs ` +
    `alpha_s ${ratioText(projection.alpha_s)} · ` +
    `statistic ${ratioText(projection.statistic)}</p></section>`
  );
}

export interface ConsoleState {
  view: SessionView | null;
  rowStates: ReadonlyMap<string, RowState>;
  projection: Projection | null;
  projectionError: string | null;
  toast: string | null;
}

export function renderConsole(state: ConsoleState): string {
  if (!state.view) {
    return `<p class="empty">No session loaded.</p>`;
  }
  const toast = state.toast
    ? `<div class="toast">${escapeHtml(state.toast)}</div>`
    : "";
  return [
    toast,
    contestHeader(state.view),
    decisionBanner(state.view),
    stageTable(state.view.stages),
    sampleChecklist(state.view, state.rowStates),
    whatIfPanel(state.projection, state.projectionError),
    `<footer><p class="caveat">${escapeHtml(state.view.caveat)}</p>`,
    `<p class="hash">event log hash <code>${escapeHtml(state.view.event_log_hash)}</code></p></footer>`,
  ].join("\n");
}
