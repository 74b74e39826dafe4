/**
 * Scripted session against the real HTTP service.
 *
 * Spawns the Python service on a fixture network, drives the controller
 * through a full episode (a deterministic "patient" answers from a fixed
 * state map), then checks that the ranked diagnosis on the end screen is
 * exactly what replaying the service transcript produces.
 */

import { spawn, ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { SessionController } from "../src/controller.js";

const PORT = 18472;
const BASE = `http://127.0.0.1:${PORT}`;
const NET_PATH = new URL("../../tests/data/aneurysm_hernia.json", import.meta.url)
    .pathname;

let service: ChildProcess | null = null;

async function waitForService(): Promise<void> {
    for (let attempt = 0; attempt < 60; attempt++) {
        try {
            const response = await fetch(`${BASE}/network/findings`);
            if (response.ok) return;
        } catch {
            /* not up yet */
        }
        await new Promise((resolve) => setTimeout(resolve, 250));
    }
    throw new Error("service did not come up");
}

beforeAll(async () => {
    const code = [
        "import uvicorn",
        "from qmrdx import load_network",
        "from qmrdx.service import create_app",
        `net = load_network(${JSON.stringify(NET_PATH)})`,
        `uvicorn.run(create_app(net), host="127.0.0.1", port=${PORT}, log_level="error")`,
    ].join("\n");
    service = spawn("python3", ["-c", code], { stdio: "ignore" });
    await waitForService();
}, 30_000);

afterAll(() => {
    service?.kill();
});

describe("full episode against the live service", () => {
    it("end-screen ranking equals the transcript replay, exactly", async () => {
        const api = new ApiClient(BASE);
        const controller = new SessionController(api);
        await controller.loadFindings();
        expect(controller.state.findings.length).toBe(6);

        // the scripted patient: an aneurysm presentation
        const patient = new Map<string, boolean>([
            ["Sharp abdominal pain", true],
            ["Back pain", true],
            ["Shortness of breath", false],
            ["Groin mass", false],
            ["Ache all over", false],
            ["Upper abdominal pain", false],
        ]);

        const sharp = controller.state.findings.find(
            (f) => f.name === "Sharp abdominal pain",
        );
        expect(sharp).toBeDefined();
        controller.toggleInitial(sharp!.id); // present
        controller.setConfig({ max_steps: 4, utility_threshold: 0.0, top_k: 2 });
        await controller.start();
        expect(controller.state.screen).toBe("session");

        let guard = 0;
        while (controller.state.session?.decision === "suggest" && guard < 10) {
            const question = controller.state.session.suggestion!.finding;
            await controller.answerCurrent(patient.get(question) ?? false);
            guard += 1;
        }
        if (controller.state.screen !== "done") {
            await controller.diagnoseNow();
        }
        expect(controller.state.screen).toBe("done");

        const session = controller.state.session!;
        const shown = session.diagnosis!.ranked.map((r) => [r.name, r.prob]);
        expect(shown[0]![0]).toBe("abdominal-aortic-aneurysm");

        const transcriptText = await api.transcript(session.session_id);
        const events = transcriptText
            .trim()
            .split("\n")
            .map((line) => JSON.parse(line));
        const replayed = await api.replay(events);
        expect(replayed.ranked.map((r) => [r.name, r.prob])).toEqual(shown);
        expect(replayed.steps).toBe(session.step);
        expect(replayed.reason).toBe(session.stop_reason);
    }, 30_000);

    it("override changes the posterior without using a question", async () => {
        const api = new ApiClient(BASE);
        const controller = new SessionController(api);
        await controller.loadFindings();
        const sharp = controller.state.findings.find(
            (f) => f.name === "Sharp abdominal pain",
        )!;
        const back = controller.state.findings.find((f) => f.name === "Back pain")!;
        controller.toggleInitial(sharp.id);
        await controller.start();

        const before = controller.state.session!.posterior.find(
            (d) => d.name === "abdominal-hernia",
        )!.prob;
        await controller.overrideFinding(back.id, false);
        const session = controller.state.session!;
        const after = session.posterior.find(
            (d) => d.name === "abdominal-hernia",
        )!.prob;
        expect(session.step).toBe(0);
        expect(after).toBeGreaterThan(before);
        expect(after).toBeCloseTo(0.6536, 3);
    }, 30_000);
});
