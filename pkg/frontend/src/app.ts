// Browser shell: websocket transport with reconnect, event delegation
// into the controller, and pane rendering.  All state lives in the
// controller's UiSessionModel; this file only moves DOM.

import { Controller } from "./controller.js";
import { ALL_PANES, type PaneId } from "./model.js";
import { ProtocolClient, type Transport } from "./protocol.js";
import {
    renderBanner,
    renderGoalsPane,
    renderMatchLab,
    renderProblemPane,
    renderScriptPane,
    renderSequentPane,
    renderStatus,
    renderToolbar,
    renderTreePane,
} from "./render.js";

const PANE_TITLES: Record<PaneId, string> = {
    script: "① script",
    goals: "② goals",
    sequent: "③ sequent",
    problem: "④ problem",
    tree: "⑤ proof tree",
    matchlab: "⑦ match lab",
};

const EXAMPLE_PROBLEM = `pred p/0;\npred q/0;\n\nconjecture p & q -> q & p;\n`;
const EXAMPLE_SCRIPT = `script main() {\n  impRight;\n  andLeft;\n  andRight;\n}\n`;

function wsUrl(): string {
    const proto = location.protocol === "https:" ? "wss" : "ws";
    return `${proto}://${location.host}/ws`;
}

class WebSocketTransport implements Transport {
    private messageHandler: (text: string) => void = () => {};
    private closeHandler: () => void = () => {};

    constructor(private socket: WebSocket) {
        socket.onmessage = (ev) => this.messageHandler(String(ev.data));
        socket.onclose = () => this.closeHandler();
    }

    send(text: string): void {
        this.socket.send(text);
    }
    onMessage(handler: (text: string) => void): void {
        this.messageHandler = handler;
    }
    onClose(handler: () => void): void {
        this.closeHandler = handler;
    }
    close(): void {
        this.socket.close();
    }
}

function connect(): Promise<WebSocketTransport> {
    return new Promise((resolve, reject) => {
        const socket = new WebSocket(wsUrl());
        socket.onopen = () => resolve(new WebSocketTransport(socket));
        socket.onerror = () => reject(new Error("websocket failed"));
    });
}

async function boot(): Promise<void> {
    const root = document.getElementById("app")!;
    root.innerHTML = layout();

    let controller: Controller | null = null;

    const rerender = () => {
        if (controller) render(controller);
    };

    async function start(): Promise<Controller> {
        const transport = await connect();
        const client = new ProtocolClient(transport);
        const c = new Controller(client);
        c.onChange = rerender;
        transport.onClose(() => {
            c.model.connection = "reconnecting";
            client.failAll("connection closed");
            render(c);
            void reconnectLoop(c);
        });
        return c;
    }

    async function reconnectLoop(old: Controller): Promise<void> {
        const sid = old.model.sessionId;
        for (;;) {
            await new Promise((r) => setTimeout(r, 1000));
            try {
                const fresh = await start();
                fresh.model.visible = old.model.visible;
                if (sid) await fresh.attach(sid);
                controller = fresh;
                fresh.model.connection = "connected";
                render(fresh);
                return;
            } catch {
                // keep the banner up and retry
            }
        }
    }

    controller = await start();

    ($("problem-input") as HTMLTextAreaElement).value = EXAMPLE_PROBLEM;
    ($("script-input") as HTMLTextAreaElement).value = EXAMPLE_SCRIPT;

    root.addEventListener("click", (ev) => {
        const c = controller;
        if (!c) return;
        const t = ev.target as HTMLElement;
        const actionEl = t.closest("[data-action]") as HTMLElement | null;
        const run = (p: Promise<unknown>) =>
            void p.catch((e) => showActionError(c, e));

        if (actionEl) {
            const action = actionEl.dataset.action!;
            if (action === "create") {
                run(
                    c.create(
                        ($("problem-input") as HTMLTextAreaElement).value,
                        ($("script-input") as HTMLTextAreaElement).value,
                    ).then(() => {
                        location.hash = c.model.sessionId ?? "";
                    }),
                );
            } else if (action === "attach") {
                const sid = ($("attach-input") as HTMLInputElement).value.trim();
                if (sid)
                    run(c.attach(sid).then(() => (location.hash = sid)));
            } else if (action === "step") {
                run(c.step(actionEl.dataset.kind as never));
            } else if (action === "continue") {
                run(c.continueRun());
            } else if (action === "match-eval") {
                const input = root.querySelector(
                    "[data-role=pattern]",
                ) as HTMLInputElement | null;
                if (input) run(c.evalPattern(input.value));
            } else if (action === "toggle-pane") {
                c.togglePane(actionEl.dataset.pane as PaneId);
            }
            return;
        }

        const gutter = t.closest("#pane-script .gutter") as HTMLElement | null;
        if (gutter) {
            run(c.toggleBreakpoint(Number(gutter.dataset.line)));
            return;
        }
        const goalRow = t.closest("[data-goal-index]") as HTMLElement | null;
        if (goalRow) {
            run(c.selectGoal(Number(goalRow.dataset.goalIndex)));
            return;
        }
        const pos = t.closest("[data-position]") as HTMLElement | null;
        if (pos && pos.closest("#pane-sequent")) {
            run(c.showRulesAt(pos.dataset.position!));
            return;
        }
    });

    root.addEventListener("keydown", (ev) => {
        const c = controller;
        if (!c) return;
        const t = ev.target as HTMLElement;
        if (
            ev.key === "Enter" &&
            t instanceof HTMLInputElement &&
            t.dataset.role === "pattern"
        ) {
            void c.evalPattern(t.value).catch((e) => showActionError(c, e));
        }
    });

    const sid = location.hash.replace(/^#/, "");
    if (/^s\d+$/.test(sid)) {
        try {
            await controller.attach(sid);
        } catch {
            location.hash = "";
        }
    }
    render(controller);
}

function showActionError(c: Controller, e: unknown): void {
    const el = $("action-error");
    el.textContent = e instanceof Error ? e.message : String(e);
    el.classList.add("shown");
    setTimeout(() => el.classList.remove("shown"), 4000);
}

function $(id: string): HTMLElement {
    return document.getElementById(id)!;
}

function layout(): string {
    const toggles = ALL_PANES.map(
        (p) =>
            `<label><input type="checkbox" checked data-action="toggle-pane" data-pane="${p}" /> ${PANE_TITLES[p]}</label>`,
    ).join("");
    const pane = (p: PaneId) =>
        `<section class="pane" id="pane-${p}"><header>${PANE_TITLES[p]}</header><div class="pane-body" id="body-${p}"></div></section>`;
    return `
<div id="banner"></div>
<div id="topbar">
  <div id="session-forms">
    <details>
      <summary>new session</summary>
      <textarea id="problem-input" rows="5" spellcheck="false"></textarea>
      <textarea id="script-input" rows="5" spellcheck="false"></textarea>
      <button data-action="create">create</button>
    </details>
    <input id="attach-input" placeholder="s1" size="5" />
    <button data-action="attach">attach</button>
  </div>
  <div id="toolbar"></div>
  <div id="status"></div>
  <div id="pane-toggles">${toggles}</div>
  <div id="action-error"></div>
</div>
<div id="grid">
  ${pane("script")}${pane("goals")}${pane("sequent")}
  ${pane("problem")}${pane("tree")}${pane("matchlab")}
</div>`;
}

function render(c: Controller): void {
    const m = c.model;
    $("banner").innerHTML = renderBanner(m);
    $("toolbar").innerHTML = m.sessionId ? renderToolbar(m) : "";
    $("status").innerHTML = m.sessionId ? renderStatus(m) : "";
    const bodies: Record<PaneId, () => string> = {
        script: () => renderScriptPane(m),
        goals: () => renderGoalsPane(m),
        sequent: () => renderSequentPane(m),
        problem: () => renderProblemPane(m),
        tree: () => renderTreePane(m),
        matchlab: () => renderMatchLab(m),
    };
    for (const p of ALL_PANES) {
        const section = $(`pane-${p}`);
        section.style.display = m.visible[p] ? "" : "none";
        if (m.visible[p]) {
            // the match input keeps focus state; skip rewriting it while typing
            const body = $(`body-${p}`);
            const active = document.activeElement;
            if (p === "matchlab" && active && body.contains(active)) continue;
            body.innerHTML = m.sessionId ? bodies[p]() : "";
        }
    }
}

void boot();
