// Turns a formula rendering (text plus flat position/character ranges)
// into nested HTML spans so every subformula and subterm is hoverable
// and clickable by its position.

import type { FormulaSpan } from "./protocol.js";

export function escapeHtml(text: string): string {
    return text
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;");
}

interface SpanNode {
    position: string | null;
    start: number;
    end: number;
    children: SpanNode[];
}

// Ranges nest properly by construction (a subterm's range lies inside its
// formula's range); sorting outer-first lets a stack build the tree.
function buildTree(textLength: number, spans: FormulaSpan[]): SpanNode {
    const root: SpanNode = {
        position: null,
        start: 0,
        end: textLength,
        children: [],
    };
    const sorted = [...spans].sort(
        (a, b) =>
            a.start - b.start ||
            b.end - a.end ||
            a.position.length - b.position.length,
    );
    const stack: SpanNode[] = [root];
    for (const s of sorted) {
        const node: SpanNode = {
            position: s.position,
            start: s.start,
            end: s.end,
            children: [],
        };
        while (
            stack.length > 1 &&
            node.start >= stack[stack.length - 1].end
        ) {
            stack.pop();
        }
        stack[stack.length - 1].children.push(node);
        stack.push(node);
    }
    return root;
}

function renderNode(text: string, node: SpanNode): string {
    let out = "";
    let cursor = node.start;
    for (const child of node.children) {
        out += escapeHtml(text.slice(cursor, child.start));
        out += renderNode(text, child);
        cursor = child.end;
    }
    out += escapeHtml(text.slice(cursor, node.end));
    if (node.position === null) return out;
    return `<span class="pos" data-position="${escapeHtml(node.position)}">${out}</span>`;
}

export function formulaHtml(text: string, spans: FormulaSpan[]): string {
    return renderNode(text, buildTree(text.length, spans));
}
