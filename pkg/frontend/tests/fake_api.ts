/** Hand-rolled service stub with just enough session logic for UI tests. */

import {
    Api,
    DiagnosisView,
    DiseaseProb,
    FindingRef,
    SessionConfigBody,
    SessionView,
} from "../src/api.js";

export const FINDINGS: FindingRef[] = [
    { id: 0, name: "Sharp abdominal pain" },
    { id: 1, name: "Back pain" },
    { id: 2, name: "Shortness of breath" },
    { id: 3, name: "Groin mass" },
];

const DISEASES: DiseaseProb[] = [
    { id: 0, name: "aneurysm", prob: 0.5 },
    { id: 1, name: "hernia", prob: 0.5 },
];

export function sessionFixture(patch: Partial<SessionView> = {}): SessionView {
    return {
        session_id: "s1",
        status: "active",
        step: 0,
        max_steps: 10,
        utility_threshold: 0.01,
        evidence: { positive: [], negative: [], unknown: [] },
        posterior: DISEASES,
        top: DISEASES,
        degenerate: false,
        suggestion: { finding_id: 1, finding: "Back pain", utility: 0.2884 },
        decision: "suggest",
        stop_reason: null,
        diagnosis: null,
        ...patch,
    };
}

export class FakeApi implements Api {
    calls: Array<{ method: string; args: unknown[] }> = [];
    nextSession: SessionView = sessionFixture();
    failWith: Error | null = null;

    private record<T>(method: string, args: unknown[], value: T): Promise<T> {
        this.calls.push({ method, args });
        if (this.failWith) return Promise.reject(this.failWith);
        return Promise.resolve(value);
    }

    findings(): Promise<FindingRef[]> {
        return this.record("findings", [], FINDINGS);
    }

    diseases(): Promise<DiseaseProb[]> {
        return this.record("diseases", [], DISEASES);
    }

    createSession(
        config: SessionConfigBody,
        positive: string[],
        negative: string[],
    ): Promise<SessionView> {
        return this.record("createSession", [config, positive, negative], this.nextSession);
    }

    getSession(id: string): Promise<SessionView> {
        return this.record("getSession", [id], this.nextSession);
    }

    answer(id: string, finding: number, value: boolean | null): Promise<SessionView> {
        return this.record("answer", [id, finding, value], this.nextSession);
    }

    override(id: string, finding: number, value: boolean | null): Promise<SessionView> {
        return this.record("override", [id, finding, value], this.nextSession);
    }

    diagnose(id: string): Promise<SessionView> {
        return this.record("diagnose", [id], this.nextSession);
    }

    transcript(id: string): Promise<string> {
        return this.record("transcript", [id], "");
    }

    replay(transcript: unknown[]): Promise<DiagnosisView> {
        return this.record("replay", [transcript], {
            ranked: DISEASES,
            reason: "manual",
            steps: 0,
            degenerate: false,
        });
    }
}
