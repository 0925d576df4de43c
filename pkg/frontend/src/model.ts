// UiSessionModel: the single client-side state object.  It mirrors the
// last summary received from the server (response or stateChanged event,
// these carry identical payloads) plus request-scoped view data.

import type {
    GoalDetail,
    MatchRow,
    PcInfo,
    RuleInfo,
    Summary,
    BreakpointRow,
    GoalRow,
    TreeNode,
    WireErrorInfo,
} from "./protocol.js";

export type PaneId =
    | "script"
    | "goals"
    | "sequent"
    | "problem"
    | "tree"
    | "matchlab";

export const ALL_PANES: PaneId[] = [
    "script",
    "goals",
    "sequent",
    "problem",
    "tree",
    "matchlab",
];

export interface MatchState {
    pattern: string;
    status: "idle" | "ok" | "empty" | "error";
    rows: MatchRow[];
    error: string | null;
    // positions of the canonical match, e.g. ["succ:0"]; drives pane 3 highlights
    highlights: string[];
}

export interface RulesPopup {
    position: string;
    rules: RuleInfo[];
}

export interface UiSessionModel {
    connection: "connected" | "reconnecting";
    sessionId: string | null;
    scriptText: string;
    problemText: string;
    mode: string;
    pc: PcInfo | null;
    currentLine: number;
    goals: GoalRow[];
    breakpoints: BreakpointRow[];
    traceLength: number;
    digest: string;
    finished: boolean;
    lastError: WireErrorInfo | null;
    warning: string | null;
    selectedGoalIndex: number;
    goalDetail: GoalDetail | null;
    tree: TreeNode[];
    rulesPopup: RulesPopup | null;
    match: MatchState;
    visible: Record<PaneId, boolean>;
}

export function emptyModel(): UiSessionModel {
    return {
        connection: "connected",
        sessionId: null,
        scriptText: "",
        problemText: "",
        mode: "paused",
        pc: null,
        currentLine: 0,
        goals: [],
        breakpoints: [],
        traceLength: 0,
        digest: "",
        finished: false,
        lastError: null,
        warning: null,
        selectedGoalIndex: 0,
        goalDetail: null,
        tree: [],
        rulesPopup: null,
        match: { pattern: "", status: "idle", rows: [], error: null, highlights: [] },
        visible: {
            script: true,
            goals: true,
            sequent: true,
            problem: true,
            tree: true,
            matchlab: true,
        },
    };
}

export function applySummary(model: UiSessionModel, s: Summary): void {
    model.sessionId = s.sessionId;
    model.mode = s.mode;
    model.pc = s.pc;
    model.currentLine = s.currentLine;
    model.goals = s.goals;
    model.breakpoints = s.breakpoints;
    model.traceLength = s.traceLength;
    model.digest = s.digest;
    model.finished = s.finished;
    model.lastError = s.lastError;
    model.warning = s.warning;
    // follow the interpreter's selected goal on every state change; a row
    // click (selectGoal) overrides the view until the next change
    const serverSel = s.goals.findIndex((g) => g.selected);
    model.selectedGoalIndex =
        serverSel >= 0
            ? serverSel
            : Math.min(model.selectedGoalIndex, Math.max(0, s.goals.length - 1));
}

export function breakpointAtLine(
    model: UiSessionModel,
    line: number,
): BreakpointRow | undefined {
    return model.breakpoints.find((bp) => bp.line === line);
}

export function scriptLines(model: UiSessionModel): string[] {
    const text = model.scriptText.endsWith("\n")
        ? model.scriptText.slice(0, -1)
        : model.scriptText;
    return text === "" ? [] : text.split("\n");
}

export function pcCoversLine(model: UiSessionModel, line: number): boolean {
    if (!model.pc) return false;
    return model.pc.span.startLine <= line && line <= model.pc.span.endLine;
}
