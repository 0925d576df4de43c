// Typed client for the debug server's JSON websocket protocol (v1).
// Transport-agnostic: the browser hands in a WebSocket wrapper, tests a
// node `ws` wrapper or a fake.

export interface Transport {
    send(text: string): void;
    onMessage(handler: (text: string) => void): void;
    onClose(handler: () => void): void;
    close(): void;
}

export interface Span {
    startLine: number;
    startCol: number;
    endLine: number;
    endCol: number;
}

export interface PcInfo {
    span: Span;
    boundary: "stmt" | "exit";
    stmtId: string | null;
}

export interface GoalRow {
    nodeId: number;
    branchLabel: string | null;
    sequent: string;
    selected: boolean;
}

export interface BreakpointRow {
    id: number;
    line: number;
    condition: string | null;
    enabled: boolean;
}

export interface WireErrorInfo {
    code: string;
    message: string;
    line?: number;
    col?: number;
}

export interface Summary {
    sessionId: string;
    mode: "paused" | "interactive" | "finished";
    pc: PcInfo | null;
    currentLine: number;
    goals: GoalRow[];
    traceLength: number;
    digest: string;
    breakpoints: BreakpointRow[];
    finished: boolean;
    lastError: WireErrorInfo | null;
    warning: string | null;
}

export interface AttachResult extends Summary {
    protocolVersion: number;
    scriptText: string;
    problemText: string;
}

export interface FormulaSpan {
    position: string;
    start: number;
    end: number;
}

export interface FormulaRendering {
    index: number;
    text: string;
    spans: FormulaSpan[];
}

export interface SequentRendering {
    text: string;
    ante: FormulaRendering[];
    succ: FormulaRendering[];
}

export interface GoalDetail {
    nodeId: number;
    branchLabel: string | null;
    sequent: SequentRendering;
    env: Record<string, string>;
}

export interface TreeNode {
    id: number;
    parent: number | null;
    children: number[];
    rule: string | null;
    branchLabel: string | null;
    closed: boolean;
    sequent: string;
}

export interface RuleInfo {
    rule: string;
    requires: string[];
}

export interface MatchRow {
    bindings: Record<string, { kind: string; text: string }>;
    anteAssignment: number[];
    succAssignment: number[];
    positions: string[];
}

export interface MatchEvalResult {
    count: number;
    matches: MatchRow[];
    goalNodeId: number;
}

export interface TraceRow {
    index: number;
    stmtId: string;
    span: Span;
    kind: string;
    digestBefore: string;
    digestAfter: string;
    openGoalsAfter: number;
}

export type StepKind = "over" | "into" | "backOver" | "backInto";

export interface EventFrame {
    event: string;
    sessionId: string;
    payload: Summary;
}

export class WireError extends Error {
    constructor(
        public code: string,
        message: string,
        public line?: number,
        public col?: number,
    ) {
        super(message);
    }
}

interface ResponseFrame {
    id: number | null;
    ok: boolean;
    result?: unknown;
    error?: WireErrorInfo;
}

export class ProtocolClient {
    private nextId = 1;
    private pending = new Map<
        number,
        { resolve: (v: unknown) => void; reject: (e: Error) => void }
    >();
    private eventHandlers: Array<(ev: EventFrame) => void> = [];

    constructor(private transport: Transport) {
        transport.onMessage((text) => this.dispatch(text));
    }

    onEvent(handler: (ev: EventFrame) => void): void {
        this.eventHandlers.push(handler);
    }

    close(): void {
        this.transport.close();
    }

    // Pending requests fail loudly when the socket dies under them.
    failAll(reason: string): void {
        for (const [, p] of this.pending) {
            p.reject(new WireError("ConnectionLost", reason));
        }
        this.pending.clear();
    }

    private dispatch(text: string): void {
        const frame = JSON.parse(text) as ResponseFrame | EventFrame;
        if ("event" in frame) {
            for (const h of this.eventHandlers) h(frame);
            return;
        }
        if (frame.id === null || !this.pending.has(frame.id)) return;
        const p = this.pending.get(frame.id)!;
        this.pending.delete(frame.id);
        if (frame.ok) {
            p.resolve(frame.result);
        } else {
            const e = frame.error ?? { code: "BadRequest", message: "unknown" };
            p.reject(new WireError(e.code, e.message, e.line, e.col));
        }
    }

    request<T>(method: string, params: Record<string, unknown> = {}): Promise<T> {
        const id = this.nextId++;
        return new Promise<T>((resolve, reject) => {
            this.pending.set(id, {
                resolve: resolve as (v: unknown) => void,
                reject,
            });
            this.transport.send(JSON.stringify({ id, method, params }));
        });
    }

    // -- typed method wrappers ----------------------------------------------

    create(problemText: string, scriptText: string, entry?: string) {
        return this.request<AttachResult>("session.create", {
            problemText,
            scriptText,
            ...(entry ? { entry } : {}),
        });
    }

    attach(sessionId: string) {
        return this.request<AttachResult>("session.attach", { sessionId });
    }

    listSessions() {
        return this.request<{
            sessions: Array<{
                sessionId: string;
                mode: string;
                traceLength: number;
                openGoals: number;
            }>;
        }>("session.list");
    }

    step(sessionId: string, kind: StepKind) {
        return this.request<Summary>("session.step", { sessionId, kind });
    }

    continueRun(sessionId: string) {
        return this.request<Summary>("session.continue", { sessionId });
    }

    setBreakpoint(sessionId: string, line: number, condition?: string) {
        return this.request<BreakpointRow>("session.breakpoints.set", {
            sessionId,
            line,
            ...(condition ? { condition } : {}),
        });
    }

    removeBreakpoint(sessionId: string, id: number) {
        return this.request<{ removed: number }>("session.breakpoints.remove", {
            sessionId,
            id,
        });
    }

    goals(sessionId: string) {
        return this.request<{ goals: GoalRow[] }>("state.goals", { sessionId });
    }

    goal(sessionId: string, index: number) {
        return this.request<GoalDetail>("state.goal", { sessionId, index });
    }

    proofTree(sessionId: string) {
        return this.request<{ root: number; nodes: TreeNode[] }>(
            "state.prooftree",
            { sessionId },
        );
    }

    script(sessionId: string) {
        return this.request<{
            source: string;
            entry: string;
            pc: PcInfo | null;
            currentLine: number;
        }>("state.script", { sessionId });
    }

    trace(sessionId: string) {
        return this.request<{ entries: TraceRow[]; cursor: number }>(
            "state.trace",
            { sessionId },
        );
    }

    rules(sessionId: string, goal: number, position?: string) {
        return this.request<{ rules: RuleInfo[] }>("interactive.rules", {
            sessionId,
            goal,
            ...(position ? { position } : {}),
        });
    }

    matchEval(sessionId: string, goalIndex: number, pattern: string) {
        return this.request<MatchEvalResult>("match.eval", {
            sessionId,
            goalIndex,
            pattern,
        });
    }
}
