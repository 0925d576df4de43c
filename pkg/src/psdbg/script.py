"""The proof-script language: lexer, parser, AST with source spans and
stable statement ids, pretty-printer, and static validation.

Scripts look like:

    script main() {
      prover.maxSteps := 400;
      auto;
      foreach { tryclose; }
      cases {
        case match `==> _ & _`:
          andRight;
        default:
          auto;
      }
    }

Backtick literals hold pattern or term text; they are parsed lazily against
the session signature (case-match patterns eagerly, since they cannot depend
on it).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .fol import LogicError, ParseError, Signature, parse_formula, parse_term
from .patterns import SequentPattern, parse_sequent_pattern


@dataclass(frozen=True)
class Span:
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def covers_line(self, line: int) -> bool:
        return self.start_line <= line <= self.end_line

    def render(self) -> str:
        return f"{self.start_line}:{self.start_col}-{self.end_line}:{self.end_col}"


@dataclass(frozen=True)
class StatementId:
    script: str
    index: int

    def render(self) -> str:
        return f"{self.script}:{self.index}"

    @staticmethod
    def parse(text: str) -> "StatementId":
        name, _, idx = text.rpartition(":")
        return StatementId(name, int(idx))


# ---------------------------------------------------------------------------
# Expressions

@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class StringLit:
    value: str


@dataclass(frozen=True)
class TermLit:
    """Backtick-quoted pattern/term/formula text, kept raw until needed."""

    text: str


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "!" or "-"
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = IntLit | BoolLit | StringLit | TermLit | VarRef | Unary | Binary


# ---------------------------------------------------------------------------
# Statements

@dataclass(eq=True)
class Block:
    statements: list["Statement"]
    span: Span = field(compare=False, default=Span(0, 0, 0, 0))


@dataclass(eq=True)
class CommandCall:
    name: str
    args: tuple[tuple[str, Expr], ...] = ()
    span: Span = field(compare=False, default=Span(0, 0, 0, 0))
    sid: StatementId | None = field(compare=False, default=None)

    def arg(self, name: str) -> Expr | None:
        for k, v in self.args:
            if k == name:
                return v
        return None


@dataclass(eq=True)
class Assignment:
    var_name: str
    value: Expr
    span: Span = field(compare=False, default=Span(0, 0, 0, 0))
    sid: StatementId | None = field(compare=False, default=None)


@dataclass(eq=True)
class Foreach:
    body: Block
    span: Span = field(compare=False, default=Span(0, 0, 0, 0))
    sid: StatementId | None = field(compare=False, default=None)


@dataclass(eq=True)
class TheOnly:
    body: Block
    span: Span = field(compare=False, default=Span(0, 0, 0, 0))
    sid: StatementId | None = field(compare=False, default=None)


@dataclass(eq=True)
class CaseBranch:
    pattern_text: str
    pattern: SequentPattern = field(compare=False)
    body: Block = field(default_factory=lambda: Block([]))
    span: Span = field(compare=False, default=Span(0, 0, 0, 0))


@dataclass(eq=True)
class Cases:
    branches: list[CaseBranch]
    default: Block | None = None
    span: Span = field(compare=False, default=Span(0, 0, 0, 0))
    sid: StatementId | None = field(compare=False, default=None)


@dataclass(eq=True)
class ScriptCall:
    name: str
    args: tuple[tuple[str, Expr], ...] = ()
    span: Span = field(compare=False, default=Span(0, 0, 0, 0))
    sid: StatementId | None = field(compare=False, default=None)


Statement = CommandCall | Assignment | Foreach | TheOnly | Cases | ScriptCall


@dataclass(eq=True)
class Script:
    name: str
    parameters: tuple[str, ...]
    body: Block
    span: Span = field(compare=False, default=Span(0, 0, 0, 0))


@dataclass(eq=True)
class ScriptFile:
    scripts: list[Script]
    source_text: str = field(compare=False, default="")

    def script(self, name: str) -> Script:
        for s in self.scripts:
            if s.name == name:
                return s
        raise ScriptError(f"no script named '{name}'")

    def entry(self) -> Script:
        return self.scripts[0]

    def statements(self):
        for s in self.scripts:
            yield from walk_statements(s.body)


class ScriptError(LogicError):
    code = "ScriptError"


def walk_statements(block: Block):
    """Preorder walk: statement before its nested blocks."""
    for stmt in block.statements:
        yield stmt
        if isinstance(stmt, (Foreach, TheOnly)):
            yield from walk_statements(stmt.body)
        elif isinstance(stmt, Cases):
            for branch in stmt.branches:
                yield from walk_statements(branch.body)
            if stmt.default is not None:
                yield from walk_statements(stmt.default)


# ---------------------------------------------------------------------------
# Lexer

KEYWORDS = {"script", "foreach", "theonly", "cases", "case", "match", "default"}

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*")
_PUNCT = (
    ":=", "==", "!=", "<=", ">=", "&&", "||",
    "{", "}", "(", ")", ";", ":", ",", "=", "<", ">", "!", "-", "+",
)


@dataclass(frozen=True)
class STok:
    kind: str  # kw ident int string backtick punct eof
    text: str
    line: int
    col: int

    @property
    def end_col(self) -> int:
        if self.kind == "string":
            return self.col + len(self.text) + 2
        if self.kind == "backtick":
            return self.col + len(self.text) + 2
        return self.col + len(self.text)


def tokenize_script(text: str) -> list[STok]:
    toks: list[STok] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c in " \t\r":
            i, col = i + 1, col + 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "`":
            end = text.find("`", i + 1)
            if end < 0:
                raise ParseError("unterminated backtick literal", line, col)
            payload = text[i + 1 : end]
            if "\n" in payload:
                raise ParseError("backtick literal spans lines", line, col)
            toks.append(STok("backtick", payload, line, col))
            col += end - i + 1
            i = end + 1
            continue
        if c == '"':
            j = i + 1
            out = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    esc = text[j + 1]
                    out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
                    j += 2
                elif text[j] == "\n":
                    raise ParseError("unterminated string", line, col)
                else:
                    out.append(text[j])
                    j += 1
            if j >= n:
                raise ParseError("unterminated string", line, col)
            raw_len = j - i + 1
            toks.append(STok("string", "".join(out), line, col))
            col += raw_len
            i = j + 1
            continue
        if c.isdigit():
            m = re.match(r"\d+", text[i:])
            toks.append(STok("int", m.group(0), line, col))
            i += m.end()
            col += m.end()
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            word = m.group(0)
            kind = "kw" if word in KEYWORDS else "ident"
            toks.append(STok(kind, word, line, col))
            i = m.end()
            col += len(word)
            continue
        hit = next((p for p in _PUNCT if text.startswith(p, i)), None)
        if hit:
            toks.append(STok("punct", hit, line, col))
            i += len(hit)
            col += len(hit)
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(STok("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser

_CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")


class _ScriptParser:
    def __init__(self, toks: list[STok]):
        self.toks = toks
        self.pos = 0

    @property
    def cur(self) -> STok:
        return self.toks[self.pos]

    def peek(self, ahead: int = 1) -> STok:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def advance(self) -> STok:
        t = self.cur
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        return self.cur.kind == kind and (text is None or self.cur.text == text)

    def eat(self, kind: str, text: str | None = None) -> STok:
        if not self.at(kind, text):
            want = text or kind
            got = self.cur.text or self.cur.kind
            raise ParseError(f"expected {want!r}, found {got!r}", self.cur.line, self.cur.col)
        return self.advance()

    def file(self) -> ScriptFile:
        scripts = []
        while not self.at("eof"):
            scripts.append(self.script())
        if not scripts:
            raise ParseError("empty script file", self.cur.line, self.cur.col)
        names = [s.name for s in scripts]
        if len(set(names)) != len(names):
            dup = next(n for n in names if names.count(n) > 1)
            raise ParseError(f"duplicate script name '{dup}'", 1, 1)
        return ScriptFile(scripts)

    def script(self) -> Script:
        start = self.eat("kw", "script")
        name = self.eat("ident").text
        self.eat("punct", "(")
        params: list[str] = []
        if self.at("ident"):
            params.append(self.advance().text)
            while self.at("punct", ","):
                self.advance()
                params.append(self.eat("ident").text)
        if len(set(params)) != len(params):
            raise ParseError(f"duplicate parameter in '{name}'", start.line, start.col)
        self.eat("punct", ")")
        body = self.block()
        span = Span(start.line, start.col, body.span.end_line, body.span.end_col)
        return Script(name, tuple(params), body, span)

    def block(self) -> Block:
        opening = self.eat("punct", "{")
        stmts = []
        while not self.at("punct", "}"):
            stmts.append(self.statement())
        closing = self.eat("punct", "}")
        return Block(stmts, Span(opening.line, opening.col, closing.line, closing.end_col))

    def statement(self) -> Statement:
        t = self.cur
        if t.kind == "kw" and t.text == "foreach":
            self.advance()
            body = self.block()
            return Foreach(body, Span(t.line, t.col, body.span.end_line, body.span.end_col))
        if t.kind == "kw" and t.text == "theonly":
            self.advance()
            body = self.block()
            return TheOnly(body, Span(t.line, t.col, body.span.end_line, body.span.end_col))
        if t.kind == "kw" and t.text == "cases":
            return self.cases()
        if t.kind != "ident":
            raise ParseError(
                f"expected a statement, found {t.text or t.kind!r}", t.line, t.col
            )
        nxt = self.peek()
        if nxt.kind == "punct" and nxt.text == ":=":
            self.advance()
            self.advance()
            value = self.expr()
            end = self.eat("punct", ";")
            return Assignment(t.text, value, Span(t.line, t.col, end.line, end.end_col))
        if nxt.kind == "punct" and nxt.text == "(":
            self.advance()
            self.advance()
            args = []
            if not self.at("punct", ")"):
                args.append(self.named_arg())
                while self.at("punct", ","):
                    self.advance()
                    args.append(self.named_arg())
            self.eat("punct", ")")
            end = self.eat("punct", ";")
            return ScriptCall(
                t.text, tuple(args), Span(t.line, t.col, end.line, end.end_col)
            )
        self.advance()
        args = []
        while self.at("ident") and self.peek().kind == "punct" and self.peek().text == "=":
            args.append(self.named_arg())
        end = self.eat("punct", ";")
        return CommandCall(t.text, tuple(args), Span(t.line, t.col, end.line, end.end_col))

    def named_arg(self) -> tuple[str, Expr]:
        name = self.eat("ident").text
        self.eat("punct", "=")
        return (name, self.expr())

    def cases(self) -> Cases:
        start = self.eat("kw", "cases")
        self.eat("punct", "{")
        branches: list[CaseBranch] = []
        default: Block | None = None
        while not self.at("punct", "}"):
            if self.at("kw", "case"):
                c = self.advance()
                self.eat("kw", "match")
                lit = self.eat("backtick")
                try:
                    pattern = parse_sequent_pattern(lit.text)
                except ParseError as e:
                    raise ParseError(
                        f"bad case pattern: {e.message}", lit.line, lit.col
                    ) from None
                self.eat("punct", ":")
                body = self.case_body()
                branches.append(
                    CaseBranch(
                        lit.text,
                        pattern,
                        body,
                        Span(c.line, c.col, body.span.end_line, body.span.end_col),
                    )
                )
            elif self.at("kw", "default"):
                if default is not None:
                    raise ParseError("duplicate default", self.cur.line, self.cur.col)
                self.advance()
                self.eat("punct", ":")
                default = self.case_body()
            else:
                t = self.cur
                raise ParseError(
                    f"expected 'case' or 'default', found {t.text or t.kind!r}",
                    t.line,
                    t.col,
                )
        end = self.eat("punct", "}")
        if not branches:
            raise ParseError("cases needs at least one case", start.line, start.col)
        return Cases(branches, default, Span(start.line, start.col, end.line, end.end_col))

    def case_body(self) -> Block:
        stmts = [self.statement()]
        while not (
            self.at("punct", "}") or self.at("kw", "case") or self.at("kw", "default")
        ):
            stmts.append(self.statement())
        first, last = stmts[0].span, stmts[-1].span
        return Block(
            stmts, Span(first.start_line, first.start_col, last.end_line, last.end_col)
        )

    # Expressions: || < && < comparisons < additive < unary < primary
    def expr(self) -> Expr:
        left = self.and_expr()
        while self.at("punct", "||"):
            self.advance()
            left = Binary("||", left, self.and_expr())
        return left

    def and_expr(self) -> Expr:
        left = self.cmp_expr()
        while self.at("punct", "&&"):
            self.advance()
            left = Binary("&&", left, self.cmp_expr())
        return left

    def cmp_expr(self) -> Expr:
        left = self.add_expr()
        if self.cur.kind == "punct" and self.cur.text in _CMP_OPS:
            op = self.advance().text
            return Binary(op, left, self.add_expr())
        return left

    def add_expr(self) -> Expr:
        left = self.unary()
        while self.cur.kind == "punct" and self.cur.text in ("+", "-"):
            op = self.advance().text
            left = Binary(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.at("punct", "!"):
            self.advance()
            return Unary("!", self.unary())
        if self.at("punct", "-"):
            self.advance()
            return Unary("-", self.unary())
        return self.primary()

    def primary(self) -> Expr:
        t = self.cur
        if t.kind == "int":
            self.advance()
            return IntLit(int(t.text))
        if t.kind == "string":
            self.advance()
            return StringLit(t.text)
        if t.kind == "backtick":
            self.advance()
            return TermLit(t.text)
        if t.kind == "ident":
            if t.text == "true":
                self.advance()
                return BoolLit(True)
            if t.text == "false":
                self.advance()
                return BoolLit(False)
            self.advance()
            return VarRef(t.text)
        if self.at("punct", "("):
            self.advance()
            e = self.expr()
            self.eat("punct", ")")
            return e
        raise ParseError(
            f"expected an expression, found {t.text or t.kind!r}", t.line, t.col
        )


def assign_statement_ids(script: Script):
    for i, stmt in enumerate(walk_statements(script.body)):
        stmt.sid = StatementId(script.name, i)


def parse_expression(text: str) -> Expr:
    """Parse a standalone expression, e.g. a breakpoint condition."""
    parser = _ScriptParser(tokenize_script(text))
    e = parser.expr()
    if not parser.at("eof"):
        t = parser.cur
        raise ParseError(
            f"unexpected {t.text or t.kind!r} after expression", t.line, t.col
        )
    return e


def parse_script(text: str) -> ScriptFile:
    parser = _ScriptParser(tokenize_script(text))
    file = parser.file()
    file.source_text = text
    for script in file.scripts:
        assign_statement_ids(script)
    return file


# ---------------------------------------------------------------------------
# Pretty-printer

_EXPR_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3, "+": 4, "-": 4}


def render_expr(e: Expr, parent_prec: int = 0) -> str:
    match e:
        case IntLit(v):
            return str(v)
        case BoolLit(v):
            return "true" if v else "false"
        case StringLit(v):
            escaped = v.replace("\\", "\\\\").replace('"', '\\"')
            escaped = escaped.replace("\n", "\\n").replace("\t", "\\t")
            return f'"{escaped}"'
        case TermLit(text):
            return f"`{text}`"
        case VarRef(name):
            return name
        case Unary(op, operand):
            return op + render_expr(operand, 5)
        case Binary(op, left, right):
            prec = _EXPR_PREC[op]
            # comparisons do not chain; parenthesize nested ones on both sides
            left_prec = prec + 1 if op in _CMP_OPS else prec
            s = f"{render_expr(left, left_prec)} {op} {render_expr(right, prec + 1)}"
            return f"({s})" if parent_prec > prec else s
    raise TypeError(f"not an expression: {e!r}")


def _render_args(args: tuple[tuple[str, Expr], ...]) -> str:
    return " ".join(f"{k}={render_expr(v, 5)}" for k, v in args)


def render_statement(stmt: Statement, indent: int = 0) -> list[str]:
    pad = "  " * indent
    match stmt:
        case CommandCall(name, args):
            tail = " " + _render_args(args) if args else ""
            return [f"{pad}{name}{tail};"]
        case Assignment(var_name, value):
            return [f"{pad}{var_name} := {render_expr(value)};"]
        case ScriptCall(name, args):
            inner = ", ".join(f"{k}={render_expr(v)}" for k, v in args)
            return [f"{pad}{name}({inner});"]
        case Foreach(body):
            return [f"{pad}foreach {{"] + _render_block(body, indent + 1) + [f"{pad}}}"]
        case TheOnly(body):
            return [f"{pad}theonly {{"] + _render_block(body, indent + 1) + [f"{pad}}}"]
        case Cases(branches, default):
            lines = [f"{pad}cases {{"]
            for br in branches:
                lines.append(f"{pad}  case match `{br.pattern_text}`:")
                lines.extend(_render_block(br.body, indent + 2))
            if default is not None:
                lines.append(f"{pad}  default:")
                lines.extend(_render_block(default, indent + 2))
            lines.append(f"{pad}}}")
            return lines
    raise TypeError(f"not a statement: {stmt!r}")


def _render_block(block: Block, indent: int) -> list[str]:
    lines: list[str] = []
    for s in block.statements:
        lines.extend(render_statement(s, indent))
    return lines


def pretty_print(statements: list[Statement], indent: int = 0) -> str:
    lines: list[str] = []
    for s in statements:
        lines.extend(render_statement(s, indent))
    return "\n".join(lines)


def render_script(script: Script) -> str:
    params = ", ".join(script.parameters)
    body = pretty_print(script.body.statements, 1)
    inner = f"\n{body}\n" if body else "\n"
    return f"script {script.name}({params}) {{{inner}}}"


def render_script_file(file: ScriptFile) -> str:
    return "\n\n".join(render_script(s) for s in file.scripts) + "\n"


# ---------------------------------------------------------------------------
# Validation

@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    line: int
    col: int


BUILTIN_VARS = {"openGoals", "currentLine"}


def validate(
    file: ScriptFile, known_commands: set[str], sig: Signature
) -> list[Diagnostic]:
    """Static checks: unknown commands warn (they may be handler extensions),
    unknown script calls and unparsable backtick literals are errors,
    statically-undefined variable reads warn."""
    out: list[Diagnostic] = []
    script_names = {s.name for s in file.scripts}

    def check_lit(lit: TermLit, span: Span):
        text = lit.text
        # syntax first, via the signature-free pattern grammar
        try:
            parse_sequent_pattern(text if "==>" in text else "==> " + text)
        except ParseError as e:
            out.append(
                Diagnostic(
                    "error", f"bad backtick literal `{text}`: {e.message}",
                    span.start_line, span.start_col,
                )
            )
            return
        if "==>" in text:
            return
        try:
            parse_term(text, sig)
            return
        except LogicError:
            pass
        try:
            parse_formula(text, sig)
        except LogicError as e:
            out.append(
                Diagnostic(
                    "warning",
                    f"backtick literal `{text}` does not check against the "
                    f"problem signature: {e.message}",
                    span.start_line, span.start_col,
                )
            )

    def check_expr(e: Expr, span: Span, defined: set[str]):
        match e:
            case TermLit():
                check_lit(e, span)
            case VarRef(name):
                if name not in defined:
                    out.append(
                        Diagnostic(
                            "warning",
                            f"variable '{name}' may be undefined here",
                            span.start_line, span.start_col,
                        )
                    )
            case Unary(_, operand):
                check_expr(operand, span, defined)
            case Binary(_, left, right):
                check_expr(left, span, defined)
                check_expr(right, span, defined)
            case _:
                pass

    def check_block(block: Block, defined: set[str]):
        for stmt in block.statements:
            match stmt:
                case CommandCall(name, args):
                    if name not in known_commands:
                        out.append(
                            Diagnostic(
                                "warning",
                                f"unknown command '{name}' (treated as a "
                                f"handler extension)",
                                stmt.span.start_line, stmt.span.start_col,
                            )
                        )
                    for _, v in args:
                        if isinstance(v, VarRef):
                            continue  # bare identifiers fall back to strings
                        check_expr(v, stmt.span, defined)
                case Assignment(var_name, value):
                    check_expr(value, stmt.span, defined)
                    defined.add(var_name)
                case ScriptCall(name, args):
                    if name not in script_names:
                        out.append(
                            Diagnostic(
                                "error",
                                f"call to undefined script '{name}'",
                                stmt.span.start_line, stmt.span.start_col,
                            )
                        )
                    for _, v in args:
                        check_expr(v, stmt.span, defined)
                case Foreach(body) | TheOnly(body):
                    check_block(body, defined)
                case Cases(branches, default):
                    for br in branches:
                        branch_defined = defined | {
                            name for name, _ in br.pattern.schema_kinds
                        }
                        check_block(br.body, branch_defined)
                    if default is not None:
                        check_block(default, set(defined))

    for script in file.scripts:
        check_block(script.body, set(script.parameters) | set(BUILTIN_VARS))
    return out
