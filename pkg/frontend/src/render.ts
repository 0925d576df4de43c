// Pure renderers: model in, HTML string out.  The app shell assigns the
// strings to pane containers and handles events by delegation; tests
// assert on the strings directly.

import {
    breakpointAtLine,
    pcCoversLine,
    scriptLines,
    type UiSessionModel,
} from "./model.js";
import { escapeHtml, formulaHtml } from "./spans.js";
import type { FormulaRendering, TreeNode } from "./protocol.js";

export function renderStatus(model: UiSessionModel): string {
    const bits = [
        `<span class="mode mode-${escapeHtml(model.mode)}">${escapeHtml(model.mode)}</span>`,
        `${model.goals.length} open goal(s)`,
        `trace ${model.traceLength}`,
    ];
    if (model.digest) bits.push(`digest ${escapeHtml(model.digest.slice(0, 12))}`);
    let html = `<div class="status-line">${bits.join(" | ")}</div>`;
    if (model.lastError) {
        html += `<div class="error-banner">error[${escapeHtml(model.lastError.code)}]: ${escapeHtml(model.lastError.message)}</div>`;
    }
    if (model.warning) {
        html += `<div class="warning-banner">${escapeHtml(model.warning)}</div>`;
    }
    return html;
}

export function renderToolbar(model: UiSessionModel): string {
    const backDisabled = model.traceLength === 0 ? " disabled" : "";
    const fwdDisabled =
        model.finished || model.mode === "interactive" ? " disabled" : "";
    return (
        `<button data-action="step" data-kind="backInto"${backDisabled} title="step back into">&#8676;</button>` +
        `<button data-action="step" data-kind="backOver"${backDisabled} title="step back over">&#8606;</button>` +
        `<button data-action="step" data-kind="over"${fwdDisabled} title="step over">&#8608;</button>` +
        `<button data-action="step" data-kind="into"${fwdDisabled} title="step into">&#8677;</button>` +
        `<button data-action="continue"${fwdDisabled} title="continue">&#9654;</button>`
    );
}

// Pane 1: script source, pc highlight, breakpoint gutter.
export function renderScriptPane(model: UiSessionModel): string {
    const rows = scriptLines(model).map((text, i) => {
        const line = i + 1;
        const bp = breakpointAtLine(model, line);
        const marker = bp
            ? `<span class="bp${bp.enabled ? "" : " bp-disabled"}"${bp.condition ? ` title="${escapeHtml(bp.condition)}"` : ""}>&#9679;</span>`
            : "";
        const pcClass = pcCoversLine(model, line) ? " pc-line" : "";
        const arrow =
            model.pc && model.pc.span.startLine === line
                ? `<span class="pc-arrow">&#9656;</span>`
                : "";
        return (
            `<div class="line${pcClass}" data-line="${line}">` +
            `<span class="gutter" data-line="${line}">${marker}${String(line).padStart(3)}</span>` +
            `${arrow}<span class="code">${escapeHtml(text)}</span></div>`
        );
    });
    return `<div class="source">${rows.join("")}</div>`;
}

// Pane 2: goal list, selected goal highlighted.
export function renderGoalsPane(model: UiSessionModel): string {
    if (model.goals.length === 0) {
        return `<div class="empty">${model.finished ? "no open goals" : "no goals yet"}</div>`;
    }
    const rows = model.goals.map((g, i) => {
        const sel = i === model.selectedGoalIndex ? " goal-selected" : "";
        const focus = g.selected ? " goal-focus" : "";
        const label = g.branchLabel
            ? `<span class="branch-label">${escapeHtml(g.branchLabel)}</span>`
            : "";
        return (
            `<div class="goal-row${sel}${focus}" data-goal-index="${i}">` +
            `<span class="goal-id">#${g.nodeId}</span>${label}` +
            `<span class="goal-sequent">${escapeHtml(g.sequent)}</span></div>`
        );
    });
    return rows.join("");
}

function renderFormulaRow(
    side: string,
    f: FormulaRendering,
    highlights: string[],
): string {
    const key = `${side}:${f.index}`;
    const hl = highlights.includes(key) ? " match-hit" : "";
    return `<span class="formula${hl}" data-formula="${key}">${formulaHtml(f.text, f.spans)}</span>`;
}

// Pane 3: the selected sequent with clickable positions, the variable
// environment, and the applicable-rules popup when a position was clicked.
export function renderSequentPane(model: UiSessionModel): string {
    const d = model.goalDetail;
    if (!d) return `<div class="empty">no goal selected</div>`;
    const hl = model.match.highlights;
    const ante = d.sequent.ante
        .map((f) => renderFormulaRow("ante", f, hl))
        .join('<span class="comma">, </span>');
    const succ = d.sequent.succ
        .map((f) => renderFormulaRow("succ", f, hl))
        .join('<span class="comma">, </span>');
    let html = `<div class="sequent" data-node-id="${d.nodeId}">${ante}<span class="turnstile"> ==&gt; </span>${succ}</div>`;
    const env = Object.entries(d.env);
    if (env.length > 0) {
        const rows = env
            .map(
                ([k, v]) =>
                    `<tr><td>${escapeHtml(k)}</td><td>${escapeHtml(v)}</td></tr>`,
            )
            .join("");
        html += `<table class="env">${rows}</table>`;
    }
    if (model.rulesPopup) {
        const p = model.rulesPopup;
        const items = p.rules
            .map((r) => {
                const req =
                    r.requires.length > 0
                        ? ` <span class="requires">(${r.requires.map(escapeHtml).join(", ")})</span>`
                        : "";
                return `<li class="rule">${escapeHtml(r.rule)}${req}</li>`;
            })
            .join("");
        html +=
            `<div class="rules-popup"><div class="rules-head">rules at ${escapeHtml(p.position)}</div>` +
            `<ul>${items || "<li class='empty'>none</li>"}</ul></div>`;
    }
    return html;
}

// Pane 4: the problem file with the conjecture highlighted.
export function renderProblemPane(model: UiSessionModel): string {
    const lines = model.problemText.replace(/\n$/, "").split("\n");
    let inConjecture = false;
    const rows = lines.map((text, i) => {
        if (/^\s*conjecture\b/.test(text)) inConjecture = true;
        const cls = inConjecture ? " conjecture" : "";
        if (inConjecture && /;\s*(\/\/.*)?$/.test(text)) inConjecture = false;
        return `<div class="line${cls}" data-line="${i + 1}"><span class="gutter">${String(i + 1).padStart(3)}</span><span class="code">${escapeHtml(text)}</span></div>`;
    });
    return `<div class="source">${rows.join("")}</div>`;
}

// Pane 5: the proof tree; closed subtrees render collapsed.
export function renderTreePane(model: UiSessionModel): string {
    if (model.tree.length === 0) return `<div class="empty">no tree yet</div>`;
    const byId = new Map<number, TreeNode>(model.tree.map((n) => [n.id, n]));

    function renderNode(id: number): string {
        const n = byId.get(id);
        if (!n) return "";
        const cls = n.closed ? "tree-closed" : "tree-open";
        const label = n.branchLabel
            ? `<span class="branch-label">${escapeHtml(n.branchLabel)}</span>`
            : "";
        const rule = n.rule
            ? `<span class="tree-rule">${escapeHtml(n.rule)}</span>`
            : "";
        const head = `<span class="${cls}" data-tree-node="${n.id}">#${n.id} ${label}${escapeHtml(n.sequent)} ${rule}</span>`;
        if (n.children.length === 0) return `<li>${head}</li>`;
        const kids = `<ul>${n.children.map(renderNode).join("")}</ul>`;
        // closed inner nodes collapse; open ones stay expanded
        return `<li><details${n.closed ? "" : " open"}><summary>${head}</summary>${kids}</details></li>`;
    }

    return `<ul class="tree">${renderNode(0)}</ul>`;
}

// Pane 7: the match lab.
export function renderMatchLab(model: UiSessionModel): string {
    const m = model.match;
    let body = "";
    if (m.status === "error") {
        body = `<div class="match-error">${escapeHtml(m.error ?? "bad pattern")}</div>`;
    } else if (m.status === "empty") {
        body = `<div class="match-empty">no match</div>`;
    } else if (m.status === "ok") {
        const rows = m.rows
            .map((row, i) => {
                const binds = Object.entries(row.bindings)
                    .map(
                        ([name, b]) =>
                            `<tr><td>?${escapeHtml(name)}</td><td>${escapeHtml(b.text)}</td><td class="kind">${escapeHtml(b.kind)}</td></tr>`,
                    )
                    .join("");
                const where = row.positions.map(escapeHtml).join(", ");
                return (
                    `<div class="match-row"><div class="match-head">match ${i} at ${where || "(empty pattern)"}</div>` +
                    (binds ? `<table class="bindings">${binds}</table>` : "") +
                    `</div>`
                );
            })
            .join("");
        body = `<div class="match-count">${m.rows.length} match(es)</div>${rows}`;
    }
    return (
        `<div class="match-form">` +
        `<input type="text" class="match-input" data-role="pattern" value="${escapeHtml(m.pattern)}" placeholder="sequent pattern, e.g. ==&gt; ?F &amp; _" />` +
        `<button data-action="match-eval">eval</button></div>` +
        body
    );
}

export function renderBanner(model: UiSessionModel): string {
    if (model.connection === "connected") return "";
    return `<div class="reconnect-banner">connection lost, reconnecting&#8230;</div>`;
}
