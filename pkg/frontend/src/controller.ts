/**
 * Screen flow and session state for one diagnosis episode.
 *
 * The controller mirrors the service state verbatim (the invariant: what
 * is on screen is exactly what the server said) and serializes mutations:
 * while one request is in flight the controls report busy. A failed
 * request flips `connected` off so the view can show a retry banner.
 */

import {
    Api,
    ApiError,
    FindingRef,
    SessionConfigBody,
    SessionView,
} from "./api.js";

export type Screen = "start" | "session" | "done";

export interface LogEntry {
    kind: "question" | "answer" | "override" | "final" | "info";
    text: string;
}

export interface UiState {
    screen: Screen;
    connected: boolean;
    busy: boolean;
    error: string | null;
    findings: FindingRef[];
    search: string;
    selection: Map<number, boolean>; // start-screen picks: finding id -> present
    config: Required<SessionConfigBody>;
    session: SessionView | null;
    showAll: boolean;
    log: LogEntry[];
}

export const DEFAULT_CONFIG: Required<SessionConfigBody> = {
    max_steps: 20,
    utility_threshold: 0.01,
    depth: 1,
    utility: "kl",
    top_k: 5,
};

type Listener = (state: UiState) => void;

export class SessionController {
    state: UiState = {
        screen: "start",
        connected: true,
        busy: false,
        error: null,
        findings: [],
        search: "",
        selection: new Map(),
        config: { ...DEFAULT_CONFIG },
        session: null,
        showAll: false,
        log: [],
    };

    private listeners: Listener[] = [];
    private lastAction: (() => Promise<void>) | null = null;

    constructor(private api: Api) {}

    subscribe(listener: Listener): void {
        this.listeners.push(listener);
        listener(this.state);
    }

    private emit(): void {
        for (const listener of this.listeners) listener(this.state);
    }

    private log(kind: LogEntry["kind"], text: string): void {
        this.state.log.push({ kind, text });
    }

    /** Wrap a service call: busy flag, connection tracking, retry hook. */
    private async guarded(action: () => Promise<void>): Promise<void> {
        this.lastAction = action;
        this.state.busy = true;
        this.state.error = null;
        this.emit();
        try {
            await action();
            this.state.connected = true;
        } catch (err) {
            if (err instanceof ApiError) {
                this.state.error = `${err.status}: ${err.message}`;
            } else {
                this.state.connected = false;
                this.state.error = "service unreachable";
            }
        } finally {
            this.state.busy = false;
            this.emit();
        }
    }

    async retry(): Promise<void> {
        const action = this.lastAction;
        if (action) await this.guarded(action);
    }

    async loadFindings(): Promise<void> {
        await this.guarded(async () => {
            this.state.findings = await this.api.findings();
        });
    }

    setSearch(text: string): void {
        this.state.search = text;
        this.emit();
    }

    visibleFindings(): FindingRef[] {
        const needle = this.state.search.trim().toLowerCase();
        if (!needle) return this.state.findings;
        return this.state.findings.filter((f) =>
            f.name.toLowerCase().includes(needle),
        );
    }

    /** Cycle a start-screen pick: unset -> present -> absent -> unset. */
    toggleInitial(id: number): void {
        const current = this.state.selection.get(id);
        if (current === undefined) this.state.selection.set(id, true);
        else if (current) this.state.selection.set(id, false);
        else this.state.selection.delete(id);
        this.emit();
    }

    setConfig(patch: Partial<Required<SessionConfigBody>>): void {
        this.state.config = { ...this.state.config, ...patch };
        this.emit();
    }

    private applySession(session: SessionView): void {
        this.state.session = session;
        if (session.status === "diagnosed") {
            this.state.screen = "done";
            const top = session.diagnosis?.ranked[0];
            this.log(
                "final",
                `diagnosis (${session.stop_reason}) after ${session.step} steps: ` +
                    (top ? `${top.name} at ${(100 * top.prob).toFixed(1)}%` : "n/a"),
            );
        } else {
            this.state.screen = "session";
            if (session.suggestion) {
                this.log("question", `asked to check: ${session.suggestion.finding}`);
            }
        }
    }

    async start(): Promise<void> {
        const positive: string[] = [];
        const negative: string[] = [];
        const byId = new Map(this.state.findings.map((f) => [f.id, f.name]));
        for (const [id, present] of this.state.selection) {
            const name = byId.get(id);
            if (name === undefined) continue;
            (present ? positive : negative).push(name);
        }
        await this.guarded(async () => {
            const session = await this.api.createSession(
                this.state.config,
                positive,
                negative,
            );
            this.state.log = [];
            this.log("info", `session started with ${positive.length} positive, ${negative.length} negative findings`);
            this.applySession(session);
        });
    }

    private requireSession(): SessionView {
        const session = this.state.session;
        if (!session) throw new Error("no active session");
        return session;
    }

    async answerCurrent(value: boolean | null): Promise<void> {
        const session = this.requireSession();
        const suggestion = session.suggestion;
        if (!suggestion) return;
        await this.guarded(async () => {
            const next = await this.api.answer(
                session.session_id,
                suggestion.finding_id,
                value,
            );
            const reply = value === null ? "unknown" : value ? "yes" : "no";
            this.log("answer", `${suggestion.finding}: ${reply}`);
            this.applySession(next);
        });
    }

    async overrideFinding(id: number, value: boolean | null): Promise<void> {
        const session = this.requireSession();
        const name =
            this.state.findings.find((f) => f.id === id)?.name ?? `#${id}`;
        await this.guarded(async () => {
            const next = await this.api.override(session.session_id, id, value);
            const stateText =
                value === null ? "unknown" : value ? "present" : "absent";
            this.log("override", `${name} set to ${stateText}`);
            this.applySession(next);
        });
    }

    async diagnoseNow(): Promise<void> {
        const session = this.requireSession();
        await this.guarded(async () => {
            this.applySession(await this.api.diagnose(session.session_id));
        });
    }

    async refresh(): Promise<void> {
        const session = this.state.session;
        if (!session) {
            await this.loadFindings();
            return;
        }
        await this.guarded(async () => {
            this.applySession(await this.api.getSession(session.session_id));
        });
    }

    toggleShowAll(): void {
        this.state.showAll = !this.state.showAll;
        this.emit();
    }

    reset(): void {
        this.state.session = null;
        this.state.selection = new Map();
        this.state.screen = "start";
        this.state.log = [];
        this.state.showAll = false;
        this.emit();
    }
}
