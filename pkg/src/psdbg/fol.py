"""Single-sorted first-order logic with equality: terms, formulas, sequents,
positions, substitution, and the problem-file format.

All values are immutable after construction except Signature, which grows
when fresh constants get registered.  Scoping decides variable vs constant:
an identifier bound by an enclosing quantifier is a Variable, anything else
must be a declared constant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

ANTE = "ante"
SUCC = "succ"


class LogicError(Exception):
    """Base class for kernel errors; `code` is the wire-visible error name."""

    code = "LogicError"

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col


class ParseError(LogicError):
    code = "SyntaxError"


class UndeclaredSymbol(LogicError):
    code = "UndeclaredSymbol"

    def __init__(self, name: str, line: int | None = None, col: int | None = None):
        super().__init__(f"undeclared symbol '{name}'", line, col)
        self.name = name


class ArityMismatch(LogicError):
    code = "ArityMismatch"


class FreeVariable(LogicError):
    code = "FreeVariable"

    def __init__(self, name: str):
        super().__init__(f"formula is not closed: free variable '{name}'")
        self.name = name


# ---------------------------------------------------------------------------
# Terms and formulas

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class App:
    func: str
    args: tuple["Term", ...]


Term = Var | Const | App


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Truth:
    pass


@dataclass(frozen=True)
class Falsity:
    pass


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Atom | Eq | Truth | Falsity | Not | And | Or | Implies | Forall | Exists

TRUE = Truth()
FALSE = Falsity()


def is_term(x) -> bool:
    return isinstance(x, (Var, Const, App))


def is_formula(x) -> bool:
    return isinstance(
        x, (Atom, Eq, Truth, Falsity, Not, And, Or, Implies, Forall, Exists)
    )


def children(node) -> tuple:
    """Ordered child nodes, shared by position addressing and size/walks."""
    match node:
        case App(_, args) | Atom(_, args):
            return args
        case Eq(l, r):
            return (l, r)
        case Not(b):
            return (b,)
        case And(l, r) | Or(l, r) | Implies(l, r):
            return (l, r)
        case Forall(_, b) | Exists(_, b):
            return (b,)
        case _:
            return ()


def ast_size(node) -> int:
    return 1 + sum(ast_size(c) for c in children(node))


def free_vars(node, bound: frozenset[str] = frozenset()) -> set[str]:
    match node:
        case Var(name):
            return set() if name in bound else {name}
        case Forall(v, b) | Exists(v, b):
            return free_vars(b, bound | {v})
        case _:
            out: set[str] = set()
            for c in children(node):
                out |= free_vars(c, bound)
            return out


def subterms(node) -> list[Term]:
    """Every term node occurring anywhere in a formula or term, in walk order."""
    out: list[Term] = []

    def walk(n):
        if is_term(n):
            out.append(n)
        for c in children(n):
            walk(c)

    walk(node)
    return out


def ground_subterms(node) -> list[Term]:
    return [t for t in subterms(node) if not free_vars(t)]


def _fresh_suffix(base: str, avoid: set[str]) -> str:
    n = 1
    while f"{base}{n}" in avoid:
        n += 1
    return f"{base}{n}"


def substitute(f: Formula, var: str, t: Term) -> Formula:
    """Replace free occurrences of `var` with `t`, renaming bound variables
    that would capture free variables of `t`."""
    t_free = free_vars(t)

    def sub_term(x: Term) -> Term:
        match x:
            case Var(name):
                return t if name == var else x
            case App(fn, args):
                return App(fn, tuple(sub_term(a) for a in args))
            case _:
                return x

    def sub(g: Formula) -> Formula:
        match g:
            case Atom(p, args):
                return Atom(p, tuple(sub_term(a) for a in args))
            case Eq(l, r):
                return Eq(sub_term(l), sub_term(r))
            case Truth() | Falsity():
                return g
            case Not(b):
                return Not(sub(b))
            case And(l, r):
                return And(sub(l), sub(r))
            case Or(l, r):
                return Or(sub(l), sub(r))
            case Implies(l, r):
                return Implies(sub(l), sub(r))
            case Forall(v, b) | Exists(v, b):
                cls = type(g)
                if v == var:
                    return g
                if v in t_free and var in free_vars(b, frozenset({v})):
                    avoid = t_free | free_vars(b) | {var}
                    v2 = _fresh_suffix(v, avoid)
                    b = substitute(b, v, Var(v2))
                    return cls(v2, sub(b))
                return cls(v, sub(b))
        raise TypeError(f"not a formula: {g!r}")

    return sub(f)


def alpha_eq(f: Formula, g: Formula) -> bool:
    """Structural equality up to consistent renaming of bound variables."""

    def go(a, b, env: tuple[tuple[str, str], ...]) -> bool:
        if type(a) is not type(b):
            return False
        match a:
            case Var(n):
                for x, y in reversed(env):
                    if x == n:
                        return y == b.name
                    if y == b.name:
                        return False
                return n == b.name
            case Forall(v, body) | Exists(v, body):
                return go(body, b.body, env + ((v, b.var),))
            case Atom(p, _):
                if p != b.pred or len(a.args) != len(b.args):
                    return False
            case App(fn, _):
                if fn != b.func or len(a.args) != len(b.args):
                    return False
            case Const(n):
                return n == b.name
            case _:
                pass
        return all(go(x, y, env) for x, y in zip(children(a), children(b)))

    return go(f, g, ())


# ---------------------------------------------------------------------------
# Rendering

_PREC = {Implies: 1, Or: 2, And: 3, Not: 4}


def render_term(t: Term) -> str:
    match t:
        case Var(name) | Const(name):
            return name
        case App(fn, args):
            return f"{fn}({', '.join(render_term(a) for a in args)})"
    raise TypeError(f"not a term: {t!r}")


def render_formula(f: Formula) -> str:
    def go(g: Formula, parent_prec: int) -> str:
        match g:
            case Truth():
                return "true"
            case Falsity():
                return "false"
            case Atom(p, args):
                if not args:
                    return p
                return f"{p}({', '.join(render_term(a) for a in args)})"
            case Eq(l, r):
                return f"{render_term(l)} = {render_term(r)}"
            case Not(b):
                return "!" + go(b, _PREC[Not])
            case And(l, r):
                s = f"{go(l, _PREC[And])} & {go(r, _PREC[And] + 1)}"
                return f"({s})" if parent_prec > _PREC[And] else s
            case Or(l, r):
                s = f"{go(l, _PREC[Or])} | {go(r, _PREC[Or] + 1)}"
                return f"({s})" if parent_prec > _PREC[Or] else s
            case Implies(l, r):
                s = f"{go(l, _PREC[Implies] + 1)} -> {go(r, _PREC[Implies])}"
                return f"({s})" if parent_prec > _PREC[Implies] else s
            case Forall(v, b):
                s = f"\\forall {v}. {go(b, 0)}"
                return s if parent_prec == 0 else f"({s})"
            case Exists(v, b):
                s = f"\\exists {v}. {go(b, 0)}"
                return s if parent_prec == 0 else f"({s})"
        raise TypeError(f"not a formula: {g!r}")

    return go(f, 0)


# ---------------------------------------------------------------------------
# Sequents and positions

@dataclass(frozen=True)
class Sequent:
    """Ordered formula lists; order is significant, duplicates permitted."""

    ante: tuple[Formula, ...]
    succ: tuple[Formula, ...]

    def render(self) -> str:
        left = ", ".join(render_formula(f) for f in self.ante)
        right = ", ".join(render_formula(f) for f in self.succ)
        return f"{left} ==> {right}".strip()

    def side(self, which: str) -> tuple[Formula, ...]:
        return self.ante if which == ANTE else self.succ


@dataclass(frozen=True)
class FormulaPosition:
    """Address of a formula occurrence, or a node inside it via inner_path."""

    side: str
    index: int
    inner_path: tuple[int, ...] = ()

    def render(self) -> str:
        s = f"{self.side}:{self.index}"
        if self.inner_path:
            s += ":" + ".".join(str(i) for i in self.inner_path)
        return s

    @staticmethod
    def parse(text: str) -> "FormulaPosition":
        parts = text.split(":")
        if len(parts) not in (2, 3) or parts[0] not in (ANTE, SUCC):
            raise ParseError(f"bad position '{text}', expected side:index[:path]")
        try:
            index = int(parts[1])
            path = tuple(int(p) for p in parts[2].split(".")) if len(parts) == 3 else ()
        except ValueError:
            raise ParseError(f"bad position '{text}'") from None
        return FormulaPosition(parts[0], index, path)


class BadPosition(LogicError):
    code = "BadPosition"


def resolve_position(seq: Sequent, pos: FormulaPosition):
    side = seq.side(pos.side)
    if not 0 <= pos.index < len(side):
        raise BadPosition(f"no formula at {pos.render()}")
    node = side[pos.index]
    for i in pos.inner_path:
        kids = children(node)
        if not 0 <= i < len(kids):
            raise BadPosition(f"path leaves the tree at {pos.render()}")
        node = kids[i]
    return node


def enumerate_positions(seq: Sequent) -> list[FormulaPosition]:
    out: list[FormulaPosition] = []
    for side_name in (ANTE, SUCC):
        for i, f in enumerate(seq.side(side_name)):
            stack = [((), f)]
            while stack:
                path, node = stack.pop()
                out.append(FormulaPosition(side_name, i, path))
                kids = children(node)
                for j in reversed(range(len(kids))):
                    stack.append((path + (j,), kids[j]))
    return out


# ---------------------------------------------------------------------------
# Signature and problems

@dataclass
class Signature:
    constants: set[str] = field(default_factory=set)
    functions: dict[str, int] = field(default_factory=dict)
    predicates: dict[str, int] = field(default_factory=dict)

    def declared(self, name: str) -> bool:
        return name in self.constants or name in self.functions or name in self.predicates

    def declare_const(self, name: str):
        if self.declared(name):
            raise LogicError(f"symbol '{name}' already declared")
        self.constants.add(name)

    def declare_fun(self, name: str, arity: int):
        if self.declared(name):
            raise LogicError(f"symbol '{name}' already declared")
        if arity < 1:
            raise LogicError(f"function '{name}' needs arity >= 1")
        self.functions[name] = arity

    def declare_pred(self, name: str, arity: int):
        if self.declared(name):
            raise LogicError(f"symbol '{name}' already declared")
        if arity < 0:
            raise LogicError(f"negative arity for '{name}'")
        self.predicates[name] = arity

    def clone(self) -> "Signature":
        return Signature(set(self.constants), dict(self.functions), dict(self.predicates))


def fresh_constant(sig: Signature, base: str) -> str:
    """First unused of base, base_0, base_1, ...; registered permanently."""
    name = base
    n = 0
    while sig.declared(name):
        name = f"{base}_{n}"
        n += 1
    sig.constants.add(name)
    return name


@dataclass
class Problem:
    signature: Signature
    assumptions: list[Formula]
    conjecture: Formula
    source_text: str = ""

    def __post_init__(self):
        for f in self.assumptions + [self.conjecture]:
            fv = free_vars(f)
            if fv:
                raise FreeVariable(sorted(fv)[0])

    def root_sequent(self) -> Sequent:
        return Sequent(tuple(self.assumptions), (self.conjecture,))


# ---------------------------------------------------------------------------
# Lexer, shared with the pattern language

KEYWORDS = {"true", "false", "const", "fun", "pred", "assume", "conjecture"}

_PUNCT2 = ("==>", "->")
_PUNCT1 = "(),.;/=&|!"


@dataclass(frozen=True)
class Tok:
    kind: str  # ident nat schema quant punct eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Tok]:
    toks: list[Tok] = []
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
        if c == "\\":
            m = re.match(r"\\(forall|exists)", text[i:])
            if not m:
                raise ParseError("expected \\forall or \\exists", line, col)
            toks.append(Tok("quant", m.group(1), line, col))
            i += m.end()
            col += m.end()
            continue
        if c == "?":
            m = IDENT_RE.match(text, i + 1)
            if not m:
                raise ParseError("expected identifier after '?'", line, col)
            toks.append(Tok("schema", m.group(0), line, col))
            col += 1 + len(m.group(0))
            i = m.end()
            continue
        hit = next((p for p in _PUNCT2 if text.startswith(p, i)), None)
        if hit:
            toks.append(Tok("punct", hit, line, col))
            i += len(hit)
            col += len(hit)
            continue
        if c in _PUNCT1:
            toks.append(Tok("punct", c, line, col))
            i += 1
            col += 1
            continue
        if c.isdigit():
            m = re.match(r"\d+", text[i:])
            toks.append(Tok("nat", m.group(0), line, col))
            i += m.end()
            col += m.end()
            continue
        m = IDENT_RE.match(text, i)
        if m:
            toks.append(Tok("ident", m.group(0), line, col))
            col += len(m.group(0))
            i = m.end()
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Tok("eof", "", line, col))
    return toks


class TokenStream:
    def __init__(self, toks: list[Tok]):
        self.toks = toks
        self.pos = 0

    @property
    def cur(self) -> Tok:
        return self.toks[self.pos]

    def advance(self) -> Tok:
        t = self.cur
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.cur
        return t.kind == kind and (text is None or t.text == text)

    def eat(self, kind: str, text: str | None = None) -> Tok:
        if not self.at(kind, text):
            want = text or kind
            raise ParseError(
                f"expected {want!r}, found {self.cur.text or self.cur.kind!r}",
                self.cur.line,
                self.cur.col,
            )
        return self.advance()


# ---------------------------------------------------------------------------
# Concrete formula/term parsing (signature-checked)

class _FormulaParser:
    """Recursive descent over the token stream.

    Precedence: ! > & > | > -> (right-assoc); quantifier bodies extend
    maximally right.
    """

    def __init__(self, ts: TokenStream, sig: Signature):
        self.ts = ts
        self.sig = sig
        self.bound: list[str] = []

    def formula(self) -> Formula:
        return self.implication()

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.ts.at("punct", "->"):
            self.ts.advance()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.ts.at("punct", "|"):
            self.ts.advance()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.negation()
        while self.ts.at("punct", "&"):
            self.ts.advance()
            f = And(f, self.negation())
        return f

    def negation(self) -> Formula:
        if self.ts.at("punct", "!"):
            self.ts.advance()
            return Not(self.negation())
        return self.primary()

    def primary(self) -> Formula:
        ts = self.ts
        if ts.at("quant"):
            q = ts.advance().text
            name = ts.eat("ident").text
            ts.eat("punct", ".")
            self.bound.append(name)
            try:
                body = self.formula()
            finally:
                self.bound.pop()
            return (Forall if q == "forall" else Exists)(name, body)
        if ts.at("punct", "("):
            ts.advance()
            f = self.formula()
            ts.eat("punct", ")")
            return f
        if ts.at("ident", "true"):
            ts.advance()
            return TRUE
        if ts.at("ident", "false"):
            ts.advance()
            return FALSE
        tok = ts.cur
        first = self.applicative()
        if ts.at("punct", "="):
            ts.advance()
            lhs = self.as_term(first, tok)
            rtok = ts.cur
            rhs = self.as_term(self.applicative(), rtok)
            return Eq(lhs, rhs)
        return self.as_atom(first, tok)

    # An applicative is IDENT or IDENT(args); classification into predicate
    # atom vs function term is decided by the caller from context.
    def applicative(self):
        tok = self.ts.eat("ident")
        if self.ts.at("punct", "("):
            self.ts.advance()
            args = [self.term()]
            while self.ts.at("punct", ","):
                self.ts.advance()
                args.append(self.term())
            self.ts.eat("punct", ")")
            return (tok.text, tuple(args), tok)
        return (tok.text, None, tok)

    def term(self) -> Term:
        tok = self.ts.cur
        return self.as_term(self.applicative(), tok)

    def as_term(self, app, tok: Tok) -> Term:
        name, args, _ = app
        if args is None:
            if name in self.bound:
                return Var(name)
            if name in self.sig.constants:
                return Const(name)
            raise UndeclaredSymbol(name, tok.line, tok.col)
        if name not in self.sig.functions:
            if self.sig.declared(name):
                raise ArityMismatch(
                    f"'{name}' is not a function", tok.line, tok.col
                )
            raise UndeclaredSymbol(name, tok.line, tok.col)
        want = self.sig.functions[name]
        if len(args) != want:
            raise ArityMismatch(
                f"function '{name}' expects {want} arguments, got {len(args)}",
                tok.line,
                tok.col,
            )
        return App(name, args)

    def as_atom(self, app, tok: Tok) -> Formula:
        name, args, _ = app
        if name not in self.sig.predicates:
            if self.sig.declared(name) or name in self.bound:
                raise ArityMismatch(
                    f"'{name}' is not a predicate", tok.line, tok.col
                )
            raise UndeclaredSymbol(name, tok.line, tok.col)
        want = self.sig.predicates[name]
        got = 0 if args is None else len(args)
        if got != want:
            raise ArityMismatch(
                f"predicate '{name}' expects {want} arguments, got {got}",
                tok.line,
                tok.col,
            )
        return Atom(name, args or ())


def parse_formula(text: str, sig: Signature) -> Formula:
    ts = TokenStream(tokenize(text))
    f = _FormulaParser(ts, sig).formula()
    if not ts.at("eof"):
        raise ParseError(
            f"trailing input {ts.cur.text!r}", ts.cur.line, ts.cur.col
        )
    return f


def parse_term(text: str, sig: Signature) -> Term:
    ts = TokenStream(tokenize(text))
    t = _FormulaParser(ts, sig).term()
    if not ts.at("eof"):
        raise ParseError(
            f"trailing input {ts.cur.text!r}", ts.cur.line, ts.cur.col
        )
    return t


def parse_problem(text: str) -> Problem:
    """Parse a `.sqp` problem file: declarations, assumptions, one conjecture."""
    ts = TokenStream(tokenize(text))
    sig = Signature()
    assumptions: list[Formula] = []
    conjecture: Formula | None = None
    def decl_name() -> Tok:
        name = ts.eat("ident")
        if name.text in KEYWORDS:
            raise ParseError(
                f"{name.text!r} is reserved and cannot be declared",
                name.line,
                name.col,
            )
        return name

    while not ts.at("eof"):
        tok = ts.eat("ident")
        if tok.text == "const":
            name = decl_name()
            try:
                sig.declare_const(name.text)
            except LogicError as e:
                raise ParseError(e.message, name.line, name.col) from None
        elif tok.text == "fun":
            name = decl_name()
            ts.eat("punct", "/")
            arity = int(ts.eat("nat").text)
            try:
                sig.declare_fun(name.text, arity)
            except LogicError as e:
                raise ParseError(e.message, name.line, name.col) from None
        elif tok.text == "pred":
            name = decl_name()
            arity = 0
            if ts.at("punct", "/"):
                ts.advance()
                arity = int(ts.eat("nat").text)
            try:
                sig.declare_pred(name.text, arity)
            except LogicError as e:
                raise ParseError(e.message, name.line, name.col) from None
        elif tok.text == "assume":
            assumptions.append(_FormulaParser(ts, sig).formula())
        elif tok.text == "conjecture":
            if conjecture is not None:
                raise ParseError("duplicate conjecture", tok.line, tok.col)
            conjecture = _FormulaParser(ts, sig).formula()
        else:
            raise ParseError(
                f"expected declaration or conjecture, found {tok.text!r}",
                tok.line,
                tok.col,
            )
        ts.eat("punct", ";")
    if conjecture is None:
        raise ParseError("problem file has no conjecture", ts.cur.line, ts.cur.col)
    return Problem(sig, assumptions, conjecture, source_text=text)
