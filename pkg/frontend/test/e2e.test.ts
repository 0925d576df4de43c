// End-to-end: a real debug server, a real websocket, and the controller
// driving it the way gutter and toolbar clicks do.  After every action
// the rendered pc and goal list must agree with fresh state.* queries.

import { spawn, type ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Controller } from "../src/controller.js";
import { ProtocolClient, type Transport } from "../src/protocol.js";
import { renderGoalsPane, renderProblemPane, renderScriptPane } from "../src/render.js";
import { escapeHtml } from "../src/spans.js";

const repoRoot = fileURLToPath(new URL("../..", import.meta.url));
const port = 21000 + Math.floor(Math.random() * 20000);
const problemText = readFileSync(
    join(repoRoot, "src", "psdbg", "examples", "split.sqp"),
    "utf8",
);
const scriptText = readFileSync(
    join(repoRoot, "src", "psdbg", "examples", "split.kps"),
    "utf8",
);

class NodeWsTransport implements Transport {
    private messageHandlers: Array<(text: string) => void> = [];
    private closeHandlers: Array<() => void> = [];

    constructor(private sock: WebSocket) {
        sock.on("message", (data) => {
            const text = data.toString();
            for (const h of this.messageHandlers) h(text);
        });
        sock.on("close", () => {
            for (const h of this.closeHandlers) h();
        });
    }

    send(text: string): void {
        this.sock.send(text);
    }
    onMessage(handler: (text: string) => void): void {
        this.messageHandlers.push(handler);
    }
    onClose(handler: () => void): void {
        this.closeHandlers.push(handler);
    }
    close(): void {
        this.sock.close();
    }
}

function connect(): Promise<NodeWsTransport> {
    return new Promise((resolve, reject) => {
        const sock = new WebSocket(`ws://127.0.0.1:${port}/ws`);
        sock.on("open", () => resolve(new NodeWsTransport(sock)));
        sock.on("error", reject);
    });
}

async function waitHealthy(timeoutMs: number): Promise<void> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
        try {
            const r = await fetch(`http://127.0.0.1:${port}/healthz`);
            if (r.ok) return;
        } catch {
            // not up yet
        }
        if (Date.now() > deadline) throw new Error("debug server never came up");
        await new Promise((r) => setTimeout(r, 200));
    }
}

const settle = () => new Promise((r) => setTimeout(r, 100));

let child: ChildProcess;
let stderrBuf = "";
const transports: NodeWsTransport[] = [];

beforeAll(async () => {
    child = spawn("python3", ["-m", "psdbg", "serve", "--port", String(port)], {
        cwd: repoRoot,
        stdio: ["ignore", "ignore", "pipe"],
    });
    child.stderr!.on("data", (d) => (stderrBuf += String(d)));
    try {
        await waitHealthy(60_000);
    } catch (e) {
        throw new Error(`${String(e)}\nserver stderr:\n${stderrBuf}`);
    }
});

afterAll(() => {
    for (const t of transports) t.close();
    child?.kill();
});

async function newController(): Promise<Controller> {
    const transport = await connect();
    transports.push(transport);
    return new Controller(new ProtocolClient(transport));
}

// The criterion: whatever the model claims, independent queries confirm.
async function expectMirrorsQueries(c: Controller): Promise<void> {
    const sid = c.model.sessionId!;
    const script = await c.client.script(sid);
    const goals = await c.client.goals(sid);

    expect(c.model.pc).toEqual(script.pc);
    expect(c.model.currentLine).toBe(script.currentLine);
    expect(c.model.goals).toEqual(goals.goals);

    const scriptHtml = renderScriptPane(c.model);
    if (script.pc) {
        for (
            let line = script.pc.span.startLine;
            line <= script.pc.span.endLine;
            line++
        ) {
            expect(scriptHtml).toContain(
                `<div class="line pc-line" data-line="${line}">`,
            );
        }
    } else {
        expect(scriptHtml).not.toContain("pc-line");
    }

    const goalsHtml = renderGoalsPane(c.model);
    goals.goals.forEach((g, i) => {
        expect(goalsHtml).toContain(`data-goal-index="${i}"`);
        expect(goalsHtml).toContain(escapeHtml(g.sequent));
    });
}

describe("debugging a proof through the web client", () => {
    it("runs the breakpoint/step/match flow against a live server", async () => {
        const c = await newController();

        // create
        await c.create(problemText, scriptText);
        const sid = c.model.sessionId!;
        expect(sid).toMatch(/^s\d+$/);
        expect(c.model.mode).toBe("paused");
        expect(c.model.scriptText).toBe(scriptText);
        expect(c.model.problemText).toBe(problemText);
        await expectMirrorsQueries(c);

        // toggle a breakpoint the way a gutter click does: the rendered
        // gutter cell for line 9 is the click target and carries the line
        const bpLine = 9;
        expect(renderScriptPane(c.model)).toContain(
            `<span class="gutter" data-line="${bpLine}">`,
        );
        await c.toggleBreakpoint(bpLine);
        await settle();
        expect(c.model.breakpoints.map((b) => b.line)).toEqual([bpLine]);
        const gutterCell = renderScriptPane(c.model)
            .split(`<span class="gutter" data-line="${bpLine}">`)[1]
            .split("</span>")[0];
        expect(gutterCell).toContain('class="bp"');
        await expectMirrorsQueries(c);

        // continue: pauses at the statement whose span covers the bp line
        await c.continueRun();
        await settle();
        expect(c.model.mode).toBe("paused");
        expect(c.model.finished).toBe(false);
        expect(c.model.pc).not.toBeNull();
        expect(c.model.pc!.span.startLine).toBeLessThanOrEqual(bpLine);
        expect(c.model.pc!.span.endLine).toBeGreaterThanOrEqual(bpLine);
        expect(c.model.goals.length).toBeGreaterThan(0);
        await expectMirrorsQueries(c);

        // step over twice: the trace cursor moves strictly forward
        const cursor0 = (await c.client.trace(sid)).cursor;
        await c.step("over");
        await settle();
        const cursor1 = (await c.client.trace(sid)).cursor;
        expect(cursor1).toBeGreaterThan(cursor0);
        await expectMirrorsQueries(c);

        await c.step("over");
        await settle();
        const cursor2 = (await c.client.trace(sid)).cursor;
        expect(cursor2).toBeGreaterThan(cursor1);
        await expectMirrorsQueries(c);

        // step back once: the cursor rewinds, the recorded trace stays
        const traceLen = c.model.traceLength;
        await c.step("backOver");
        await settle();
        const after = await c.client.trace(sid);
        expect(after.cursor).toBeLessThan(cursor2);
        expect(after.entries.length).toBe(traceLen);
        await expectMirrorsQueries(c);

        // match lab: one pattern against the selected goal
        await c.evalPattern("==> ?F");
        expect(c.model.match.status).toBe("ok");
        expect(c.model.match.rows.length).toBeGreaterThan(0);
        expect(c.model.match.rows[0].bindings).toHaveProperty("F");
        expect(c.model.match.highlights.length).toBeGreaterThan(0);
        await expectMirrorsQueries(c);

        // a fresh client attaching to the same session renders the same
        // script, problem, pc, goals, and breakpoints (a page reload)
        const c2 = await newController();
        await c2.attach(sid);
        await settle();
        expect(c2.model.pc).toEqual(c.model.pc);
        expect(c2.model.currentLine).toBe(c.model.currentLine);
        expect(c2.model.goals).toEqual(c.model.goals);
        expect(c2.model.breakpoints).toEqual(c.model.breakpoints);
        expect(c2.model.scriptText).toBe(c.model.scriptText);
        expect(c2.model.problemText).toBe(c.model.problemText);
        expect(renderScriptPane(c2.model)).toBe(renderScriptPane(c.model));
        expect(renderGoalsPane(c2.model)).toBe(renderGoalsPane(c.model));
        expect(renderProblemPane(c2.model)).toBe(renderProblemPane(c.model));
        await expectMirrorsQueries(c2);
    });
});
