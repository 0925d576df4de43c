// Every UI action goes through one of these methods, and so does every
// test: the DOM layer owns only event delegation, so driving the
// controller drives exactly what clicking does.

import {
    applySummary,
    breakpointAtLine,
    emptyModel,
    type UiSessionModel,
} from "./model.js";
import {
    ProtocolClient,
    WireError,
    type StepKind,
    type Summary,
} from "./protocol.js";

export class Controller {
    model: UiSessionModel = emptyModel();
    onChange: () => void = () => {};

    constructor(public client: ProtocolClient) {
        client.onEvent((ev) => {
            if (
                ev.event === "stateChanged" &&
                ev.sessionId === this.model.sessionId
            ) {
                this.absorb(ev.payload);
                void this.refreshViews().then(() => this.onChange());
            }
        });
    }

    private absorb(summary: Summary): void {
        applySummary(this.model, summary);
    }

    // Pane 3 and pane 5 data live behind their own queries.
    private async refreshViews(): Promise<void> {
        const sid = this.model.sessionId;
        if (!sid) return;
        if (this.model.goals.length > 0) {
            const idx = Math.min(
                this.model.selectedGoalIndex,
                this.model.goals.length - 1,
            );
            this.model.selectedGoalIndex = idx;
            this.model.goalDetail = await this.client.goal(sid, idx);
        } else {
            this.model.goalDetail = null;
        }
        this.model.tree = (await this.client.proofTree(sid)).nodes;
    }

    private async afterMutation(summary: Summary): Promise<void> {
        this.absorb(summary);
        this.model.rulesPopup = null;
        this.model.match.highlights = [];
        await this.refreshViews();
        this.onChange();
    }

    async create(problemText: string, scriptText: string): Promise<void> {
        const r = await this.client.create(problemText, scriptText);
        this.model = emptyModel();
        this.model.scriptText = r.scriptText;
        this.model.problemText = r.problemText;
        await this.afterMutation(r);
    }

    async attach(sessionId: string): Promise<void> {
        const r = await this.client.attach(sessionId);
        const visible = this.model.visible;
        this.model = emptyModel();
        this.model.visible = visible;
        this.model.scriptText = r.scriptText;
        this.model.problemText = r.problemText;
        await this.afterMutation(r);
    }

    async step(kind: StepKind): Promise<void> {
        const sid = this.requireSession();
        await this.afterMutation(await this.client.step(sid, kind));
    }

    async continueRun(): Promise<void> {
        const sid = this.requireSession();
        await this.afterMutation(await this.client.continueRun(sid));
    }

    // Gutter click: set a breakpoint on a bare line, remove an existing one.
    async toggleBreakpoint(line: number, condition?: string): Promise<void> {
        const sid = this.requireSession();
        const existing = breakpointAtLine(this.model, line);
        if (existing) {
            await this.client.removeBreakpoint(sid, existing.id);
        } else {
            await this.client.setBreakpoint(sid, line, condition);
        }
        // breakpoint responses carry no summary; re-pull one
        await this.afterMutation(await this.client.attach(sid));
    }

    async selectGoal(index: number): Promise<void> {
        if (index < 0 || index >= this.model.goals.length) return;
        this.model.selectedGoalIndex = index;
        this.model.rulesPopup = null;
        this.model.match.highlights = [];
        await this.refreshViews();
        this.onChange();
    }

    // Clicking a subformula asks the server what applies there.
    async showRulesAt(position: string): Promise<void> {
        const sid = this.requireSession();
        const detail = this.model.goalDetail;
        if (!detail) return;
        const r = await this.client.rules(sid, detail.nodeId, position);
        this.model.rulesPopup = { position, rules: r.rules };
        this.onChange();
    }

    async evalPattern(pattern: string): Promise<void> {
        const sid = this.requireSession();
        this.model.match.pattern = pattern;
        if (this.model.goals.length === 0) {
            this.model.match.status = "error";
            this.model.match.error = "no open goal to match against";
            this.model.match.rows = [];
            this.model.match.highlights = [];
            this.onChange();
            return;
        }
        try {
            const r = await this.client.matchEval(
                sid,
                this.model.selectedGoalIndex,
                pattern,
            );
            this.model.match.rows = r.matches;
            this.model.match.error = null;
            this.model.match.status = r.count === 0 ? "empty" : "ok";
            this.model.match.highlights =
                r.count > 0 ? r.matches[0].positions : [];
        } catch (e) {
            this.model.match.status = "error";
            this.model.match.rows = [];
            this.model.match.highlights = [];
            this.model.match.error =
                e instanceof WireError
                    ? `${e.code}: ${e.message}` +
                      (e.line !== undefined ? ` (line ${e.line}, col ${e.col})` : "")
                    : String(e);
        }
        this.onChange();
    }

    togglePane(pane: keyof UiSessionModel["visible"]): void {
        this.model.visible[pane] = !this.model.visible[pane];
        this.onChange();
    }

    private requireSession(): string {
        const sid = this.model.sessionId;
        if (!sid) throw new Error("no session");
        return sid;
    }
}
