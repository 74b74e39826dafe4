/**
 * Pure HTML rendering of the controller state plus one delegated event
 * binder. Rendering returns a string (easy to test); `bind` installs a
 * single click/input listener that routes data-action attributes to
 * controller methods.
 */

import { DiseaseProb, SessionView } from "./api.js";
import { SessionController, UiState } from "./controller.js";

function esc(text: string): string {
    return text
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;");
}

function probBar(entry: DiseaseProb, highlight: boolean): string {
    const pct = (100 * entry.prob).toFixed(1);
    return `<div class="prob-row${highlight ? " top-pick" : ""}">
      <span class="prob-name">${esc(entry.name)}</span>
      <span class="prob-track"><span class="prob-fill" style="width:${pct}%"></span></span>
      <span class="prob-value">${pct}%</span>
    </div>`;
}

function posteriorPanel(state: UiState, session: SessionView): string {
    const entries = state.showAll
        ? [...session.posterior].sort((a, b) => b.prob - a.prob || a.id - b.id)
        : session.top;
    const rows = entries.map((e, i) => probBar(e, i === 0)).join("");
    const toggle = state.showAll ? "show top only" : "show all";
    const flag = session.degenerate
        ? `<p class="degenerate">evidence has zero probability; showing prior ranking</p>`
        : "";
    return `<section class="panel posterior">
      <h2>Disease probabilities</h2>
      ${flag}${rows}
      <button data-action="toggle-show-all">${toggle}</button>
    </section>`;
}

function evidenceList(session: SessionView): string {
    const chip = (name: string, cls: string, symbol: string) =>
        `<li class="chip ${cls}">${symbol} ${esc(name)}</li>`;
    const items = [
        ...session.evidence.positive.map((f) => chip(f.name, "pos", "+")),
        ...session.evidence.negative.map((f) => chip(f.name, "neg", "&minus;")),
        ...session.evidence.unknown.map((f) => chip(f.name, "unk", "?")),
    ];
    return items.length
        ? `<ul class="chips">${items.join("")}</ul>`
        : `<p class="muted">nothing recorded yet</p>`;
}

function startScreen(state: UiState, controller: SessionController): string {
    const rows = controller
        .visibleFindings()
        .slice(0, 200)
        .map((f) => {
            const picked = state.selection.get(f.id);
            const cls =
                picked === undefined ? "" : picked ? " picked-pos" : " picked-neg";
            const mark = picked === undefined ? "" : picked ? " [present]" : " [absent]";
            return `<li><button class="finding-pick${cls}" data-action="toggle-initial" data-id="${f.id}">${esc(f.name)}${mark}</button></li>`;
        })
        .join("");
    const pickedCount = state.selection.size;
    return `<section class="panel">
      <h2>Start a diagnosis session</h2>
      <p>Pick the findings already known (click cycles present &rarr; absent &rarr; clear).</p>
      <input type="search" placeholder="search findings" value="${esc(state.search)}" data-action="search">
      <ul class="finding-list">${rows}</ul>
      <div class="config-row">
        <label>max questions
          <input type="number" min="0" value="${state.config.max_steps}" data-action="config-max-steps">
        </label>
        <label>stop threshold (nats)
          <input type="number" min="0" step="0.01" value="${state.config.utility_threshold}" data-action="config-threshold">
        </label>
        <label>lookahead
          <select data-action="config-depth">
            <option value="1"${state.config.depth === 1 ? " selected" : ""}>one step</option>
            <option value="2"${state.config.depth === 2 ? " selected" : ""}>two steps</option>
          </select>
        </label>
      </div>
      <button class="primary" data-action="start" ${state.busy ? "disabled" : ""}>
        Start (${pickedCount} finding${pickedCount === 1 ? "" : "s"})
      </button>
    </section>`;
}

function overridePanel(state: UiState, controller: SessionController): string {
    const options = controller
        .visibleFindings()
        .slice(0, 200)
        .map((f) => `<option value="${f.id}">${esc(f.name)}</option>`)
        .join("");
    return `<section class="panel">
      <h2>Override a finding</h2>
      <p class="muted">Set any finding directly; overrides do not use up a question.</p>
      <select id="override-select">${options}</select>
      <div class="button-row">
        <button data-action="override-yes">present</button>
        <button data-action="override-no">absent</button>
        <button data-action="override-clear">unknown</button>
      </div>
    </section>`;
}

function sessionScreen(state: UiState, controller: SessionController): string {
    const session = state.session as SessionView;
    const busy = state.busy ? "disabled" : "";
    let questionPanel: string;
    if (session.decision === "suggest" && session.suggestion) {
        questionPanel = `<section class="panel question">
          <h2>Question ${session.step + 1} of ${session.max_steps}</h2>
          <p class="question-text">Does the patient have
            <strong>${esc(session.suggestion.finding)}</strong>?</p>
          <p class="muted">expected information: ${session.suggestion.utility.toFixed(4)} nats</p>
          <div class="button-row">
            <button class="primary" data-action="answer-yes" ${busy}>Yes</button>
            <button class="primary" data-action="answer-no" ${busy}>No</button>
            <button data-action="answer-skip" ${busy}>Skip</button>
          </div>
        </section>`;
    } else {
        questionPanel = `<section class="panel question">
          <h2>Ready to diagnose</h2>
          <p>No further questions are worth asking (${esc(session.stop_reason ?? "stopped")}).</p>
        </section>`;
    }
    return `${questionPanel}
      <section class="panel">
        <h2>Recorded findings (step ${session.step} / ${session.max_steps})</h2>
        ${evidenceList(session)}
      </section>
      ${posteriorPanel(state, session)}
      ${overridePanel(state, controller)}
      <button class="danger" data-action="diagnose" ${busy}>Diagnose now</button>`;
}

function doneScreen(state: UiState): string {
    const session = state.session as SessionView;
    const diagnosis = session.diagnosis;
    const rows = diagnosis
        ? diagnosis.ranked.map((e, i) => probBar(e, i === 0)).join("")
        : "";
    const transcript = state.log
        .map((entry) => `<li class="log-${entry.kind}">${esc(entry.text)}</li>`)
        .join("");
    return `<section class="panel">
      <h2>Diagnosis</h2>
      <p>stopped by <strong>${esc(session.stop_reason ?? "user")}</strong>
         after ${session.step} question${session.step === 1 ? "" : "s"}</p>
      ${diagnosis?.degenerate ? `<p class="degenerate">evidence has zero probability; ranking falls back to priors</p>` : ""}
      ${rows}
      <button class="primary" data-action="reset">New session</button>
    </section>
    <section class="panel">
      <h2>Transcript</h2>
      <ol class="transcript">${transcript}</ol>
    </section>`;
}

export function renderHtml(state: UiState, controller: SessionController): string {
    const banner = !state.connected
        ? `<div class="banner error">Cannot reach the service.
             <button data-action="retry">Retry</button></div>`
        : state.error
          ? `<div class="banner warn">${esc(state.error)}</div>`
          : "";
    let body: string;
    if (state.screen === "start") body = startScreen(state, controller);
    else if (state.screen === "session") body = sessionScreen(state, controller);
    else body = doneScreen(state);
    return `${banner}${body}`;
}

export function bind(root: HTMLElement, controller: SessionController): void {
    root.addEventListener("click", (event) => {
        const target = (event.target as HTMLElement).closest<HTMLElement>(
            "[data-action]",
        );
        if (!target) return;
        const overrideSelect = root.querySelector<HTMLSelectElement>("#override-select");
        const overrideId = overrideSelect ? Number(overrideSelect.value) : NaN;
        switch (target.dataset.action) {
            case "toggle-initial":
                controller.toggleInitial(Number(target.dataset.id));
                break;
            case "start":
                void controller.start();
                break;
            case "answer-yes":
                void controller.answerCurrent(true);
                break;
            case "answer-no":
                void controller.answerCurrent(false);
                break;
            case "answer-skip":
                void controller.answerCurrent(null);
                break;
            case "override-yes":
                void controller.overrideFinding(overrideId, true);
                break;
            case "override-no":
                void controller.overrideFinding(overrideId, false);
                break;
            case "override-clear":
                void controller.overrideFinding(overrideId, null);
                break;
            case "diagnose":
                void controller.diagnoseNow();
                break;
            case "toggle-show-all":
                controller.toggleShowAll();
                break;
            case "retry":
                void controller.retry();
                break;
            case "reset":
                controller.reset();
                break;
        }
    });
    root.addEventListener("input", (event) => {
        const target = event.target as HTMLInputElement;
        switch (target.dataset.action) {
            case "search":
                controller.setSearch(target.value);
                break;
            case "config-max-steps":
                controller.setConfig({ max_steps: Number(target.value) });
                break;
            case "config-threshold":
                controller.setConfig({ utility_threshold: Number(target.value) });
                break;
            case "config-depth":
                controller.setConfig({ depth: Number(target.value) });
                break;
        }
    });
}
