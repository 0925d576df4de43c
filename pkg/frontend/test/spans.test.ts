// Nested-span HTML for formula renderings: positions become clickable
// spans, text survives untouched, markup stays escaped.

import { describe, expect, it } from "vitest";
import { escapeHtml, formulaHtml } from "../src/spans.js";
import type { FormulaSpan } from "../src/protocol.js";

function textOf(html: string): string {
    return html
        .replace(/<[^>]+>/g, "")
        .replace(/&amp;/g, "&")
        .replace(/&lt;/g, "<")
        .replace(/&gt;/g, ">")
        .replace(/&quot;/g, '"');
}

describe("escapeHtml", () => {
    it("escapes markup characters", () => {
        expect(escapeHtml('a < b & "c"')).toBe("a &lt; b &amp; &quot;c&quot;");
    });
});

describe("formulaHtml", () => {
    const text = "p & q";
    const spans: FormulaSpan[] = [
        { position: "", start: 0, end: 5 },
        { position: "0", start: 0, end: 1 },
        { position: "1", start: 4, end: 5 },
    ];

    it("round-trips the text", () => {
        expect(textOf(formulaHtml(text, spans))).toBe(text);
    });

    it("nests child positions inside their parent span", () => {
        const html = formulaHtml(text, spans);
        expect(html).toBe(
            '<span class="pos" data-position="">' +
                '<span class="pos" data-position="0">p</span>' +
                " &amp; " +
                '<span class="pos" data-position="1">q</span>' +
                "</span>",
        );
    });

    it("puts the outer span first when ranges share a start", () => {
        // f(c) at position 0 with its argument c at 0.0
        const t = "f(c)";
        const s: FormulaSpan[] = [
            { position: "0.0", start: 2, end: 3 },
            { position: "0", start: 0, end: 4 },
        ];
        const html = formulaHtml(t, s);
        expect(html).toBe(
            '<span class="pos" data-position="0">f(' +
                '<span class="pos" data-position="0.0">c</span>' +
                ")</span>",
        );
    });

    it("keeps text outside any span as plain escaped text", () => {
        const t = "x < y";
        const s: FormulaSpan[] = [{ position: "0", start: 0, end: 1 }];
        expect(formulaHtml(t, s)).toBe(
            '<span class="pos" data-position="0">x</span> &lt; y',
        );
        expect(textOf(formulaHtml(t, s))).toBe(t);
    });

    it("handles sibling spans in order", () => {
        const t = "ab";
        const s: FormulaSpan[] = [
            { position: "1", start: 1, end: 2 },
            { position: "0", start: 0, end: 1 },
        ];
        expect(textOf(formulaHtml(t, s))).toBe("ab");
        const html = formulaHtml(t, s);
        expect(html.indexOf('data-position="0"')).toBeLessThan(
            html.indexOf('data-position="1"'),
        );
    });
});
