/**
 * Typed client for the diagnosis session service. All probability math
 * lives server-side; this module only moves JSON.
 */

export interface FindingRef {
    id: number;
    name: string;
}

export interface DiseaseProb {
    id: number;
    name: string;
    prob: number;
}

export interface SuggestionView {
    finding_id: number;
    finding: string;
    utility: number;
}

export interface EvidenceView {
    positive: FindingRef[];
    negative: FindingRef[];
    unknown: FindingRef[];
}

export interface DiagnosisView {
    ranked: DiseaseProb[];
    reason: string;
    steps: number;
    degenerate: boolean;
}

export interface SessionView {
    session_id: string;
    status: "active" | "diagnosed";
    step: number;
    max_steps: number;
    utility_threshold: number;
    evidence: EvidenceView;
    posterior: DiseaseProb[];
    top: DiseaseProb[];
    degenerate: boolean;
    suggestion: SuggestionView | null;
    decision: "suggest" | "diagnose" | "done" | null;
    stop_reason: string | null;
    diagnosis: DiagnosisView | null;
}

export interface SessionConfigBody {
    max_steps?: number;
    utility_threshold?: number;
    depth?: number;
    utility?: string;
    top_k?: number;
}

export class ApiError extends Error {
    constructor(public status: number, message: string) {
        super(message);
    }
}

/** The service surface the UI consumes (lets tests substitute a stub). */
export interface Api {
    findings(): Promise<FindingRef[]>;
    diseases(): Promise<DiseaseProb[]>;
    createSession(
        config: SessionConfigBody,
        positive: string[],
        negative: string[],
    ): Promise<SessionView>;
    getSession(id: string): Promise<SessionView>;
    answer(id: string, finding: number, value: boolean | null): Promise<SessionView>;
    override(id: string, finding: number, value: boolean | null): Promise<SessionView>;
    diagnose(id: string): Promise<SessionView>;
    transcript(id: string): Promise<string>;
    replay(transcript: unknown[]): Promise<DiagnosisView>;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient implements Api {
    constructor(
        private baseUrl: string = "",
        private fetchFn: FetchLike = (input, init) => fetch(input, init),
    ) {}

    private async request<T>(path: string, init?: RequestInit): Promise<T> {
        const response = await this.fetchFn(this.baseUrl + path, init);
        if (!response.ok) {
            let detail = response.statusText;
            try {
                const body = await response.json();
                if (body && body.detail) detail = String(body.detail);
            } catch {
                /* non-JSON error body */
            }
            throw new ApiError(response.status, detail);
        }
        return (await response.json()) as T;
    }

    private post<T>(path: string, body: unknown): Promise<T> {
        return this.request<T>(path, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
        });
    }

    findings(): Promise<FindingRef[]> {
        return this.request<FindingRef[]>("/network/findings");
    }

    diseases(): Promise<DiseaseProb[]> {
        return this.request<DiseaseProb[]>("/network/diseases");
    }

    createSession(
        config: SessionConfigBody,
        positive: string[],
        negative: string[],
    ): Promise<SessionView> {
        return this.post<SessionView>("/sessions", {
            config,
            initial_evidence: { positive, negative },
        });
    }

    getSession(id: string): Promise<SessionView> {
        return this.request<SessionView>(`/sessions/${id}`);
    }

    answer(id: string, finding: number, value: boolean | null): Promise<SessionView> {
        return this.post<SessionView>(`/sessions/${id}/answer`, { finding, value });
    }

    override(id: string, finding: number, value: boolean | null): Promise<SessionView> {
        return this.post<SessionView>(`/sessions/${id}/override`, { finding, value });
    }

    diagnose(id: string): Promise<SessionView> {
        return this.post<SessionView>(`/sessions/${id}/diagnose`, {});
    }

    async transcript(id: string): Promise<string> {
        const response = await this.fetchFn(`${this.baseUrl}/sessions/${id}/transcript`);
        if (!response.ok) throw new ApiError(response.status, response.statusText);
        return response.text();
    }

    replay(transcript: unknown[]): Promise<DiagnosisView> {
        return this.post<DiagnosisView>("/replay", { transcript });
    }
}
