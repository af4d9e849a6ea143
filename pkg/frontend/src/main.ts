// Browser entry point: mounts the console against the service that served
// this page (electaudit serve --static-dir frontend/dist).

import { AuditApi } from "./api.js";
import { SessionController } from "./controller.js";
import { renderConsole } from "./view.js";

function promptInt(label: string): number | null {
  const raw = window.prompt(label);
  if (raw === null || raw.trim() === "") return null;
  const n = Number(raw);
  return Number.isInteger(n) ? n : null;
}

function mount(root: HTMLElement): void {
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get("session");
  if (!sessionId) {
    root.innerHTML =
      `<p>Open with <code>?session=&lt;session-id&gt;</code>; create sessions ` +
      `with the CLI or <code>POST /sessions</code>.</p>`;
    return;
  }

  const api = new AuditApi("");
  const controller = new SessionController(api, sessionId, (state) => {
    root.innerHTML =
      renderConsole(state) +
      `<nav class="actions">` +
      `<button type="button" data-action="draw">draw</button>` +
      `<button type="button" data-action="evaluate">evaluate stage</button>` +
      `<button type="button" data-action="what-if-n">what if n…</button>` +
      `<button type="button" data-action="refresh">refresh</button>` +
      `</nav>`;
  });

  root.addEventListener("click", (ev) => {
    const target = ev.target as HTMLElement;
    const run = (p: Promise<unknown>) =>
      p.catch((err) => window.alert(String(err)));
    switch (target.dataset["action"]) {
      case "draw":
        return run(controller.draw());
      case "evaluate":
        return run(controller.evaluate());
      case "refresh":
        return run(controller.refresh());
      case "what-if-n": {
        const n = promptInt("Project escalation to sample size n:");
        if (n !== null) run(controller.whatIfSampleSize(n));
        return;
      }
    }
    const precinct = target.dataset["tally"];
    if (precinct && controller.state.view) {
      const names = controller.state.view.pseudo_candidates.map((c) => c.name);
      const votes = names.map((name) => promptInt(`${precinct}: hand count for ${name}`));
      const ballots = promptInt(`${precinct}: ballots found`);
      run(controller.submitTally(precinct, votes, ballots));
    }
  });

  void controller.refresh().catch((err) => {
    root.innerHTML = `<p class="error">${String(err)}</p>`;
  });
}

const root = document.getElementById("root");
if (root) mount(root);
