"""Sequent patterns: parsing, matching with schema-variable bindings, and
distinguishing-pattern generation for goal selection.

Patterns are matched with containment semantics: each antecedent
(succedent) pattern must match some distinct formula on that side, extra
formulas are ignored.  `_` matches any single formula or term, `?X` matches
and binds; a schema variable's kind (term vs formula) is fixed by its
syntactic position at parse time.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .fol import (
    ANTE,
    SUCC,
    App,
    Atom,
    Const,
    Eq,
    Exists,
    Falsity,
    Forall,
    Formula,
    FormulaPosition,
    Implies,
    LogicError,
    Not,
    And,
    Or,
    ParseError,
    Sequent,
    Term,
    Tok,
    TokenStream,
    Truth,
    Var,
    ast_size,
    tokenize,
)


class NoDistinguishingPattern(LogicError):
    code = "NoDistinguishingPattern"


# ---------------------------------------------------------------------------
# Pattern AST

@dataclass(frozen=True)
class PWild:
    pass


@dataclass(frozen=True)
class PSchema:
    name: str


@dataclass(frozen=True)
class PName:
    """Concrete identifier in term position; matches a variable or constant
    of exactly that name (the pattern language is signature-free)."""

    name: str


@dataclass(frozen=True)
class PApp:
    func: str
    args: tuple["TermPattern", ...]


TermPattern = PWild | PSchema | PName | PApp


@dataclass(frozen=True)
class PAtom:
    pred: str
    args: tuple[TermPattern, ...] = ()


@dataclass(frozen=True)
class PEq:
    lhs: TermPattern
    rhs: TermPattern


@dataclass(frozen=True)
class PTrue:
    pass


@dataclass(frozen=True)
class PFalse:
    pass


@dataclass(frozen=True)
class PNot:
    body: "FormulaPattern"


@dataclass(frozen=True)
class PAnd:
    left: "FormulaPattern"
    right: "FormulaPattern"


@dataclass(frozen=True)
class POr:
    left: "FormulaPattern"
    right: "FormulaPattern"


@dataclass(frozen=True)
class PImplies:
    left: "FormulaPattern"
    right: "FormulaPattern"


@dataclass(frozen=True)
class PForall:
    binder: str  # "?X" schema form keeps the marker, concrete names do not
    body: "FormulaPattern"


@dataclass(frozen=True)
class PExists:
    binder: str
    body: "FormulaPattern"


FormulaPattern = (
    PWild | PSchema | PAtom | PEq | PTrue | PFalse | PNot | PAnd | POr
    | PImplies | PForall | PExists
)


@dataclass(frozen=True)
class SequentPattern:
    ante: tuple[FormulaPattern, ...]
    succ: tuple[FormulaPattern, ...]
    schema_kinds: tuple[tuple[str, str], ...] = ()  # name -> "term" | "formula"

    def schema_vars(self) -> dict[str, str]:
        return dict(self.schema_kinds)


def _binder_is_schema(binder: str) -> bool:
    return binder.startswith("?")


# ---------------------------------------------------------------------------
# Parsing

class _PatternParser:
    """Same grammar shape as the concrete formula language, signature-free,
    with `_`, `?X`, and schema binders added."""

    def __init__(self, ts: TokenStream):
        self.ts = ts
        self.kinds: dict[str, str] = {}

    def record(self, name: str, kind: str, tok: Tok):
        prev = self.kinds.setdefault(name, kind)
        if prev != kind:
            raise ParseError(
                f"schema variable '?{name}' used as both term and formula",
                tok.line,
                tok.col,
            )

    def sequent(self) -> SequentPattern:
        ante = self.side(stop="==>")
        self.ts.eat("punct", "==>")
        succ = self.side(stop=None)
        if not self.ts.at("eof"):
            t = self.ts.cur
            raise ParseError(f"trailing input {t.text!r}", t.line, t.col)
        return SequentPattern(
            tuple(ante), tuple(succ), tuple(sorted(self.kinds.items()))
        )

    def side(self, stop: str | None) -> list[FormulaPattern]:
        if self.ts.at("eof") or (stop and self.ts.at("punct", stop)):
            return []
        out = [self.formula()]
        while self.ts.at("punct", ","):
            self.ts.advance()
            out.append(self.formula())
        return out

    def formula(self) -> FormulaPattern:
        left = self.disjunction()
        if self.ts.at("punct", "->"):
            self.ts.advance()
            return PImplies(left, self.formula())
        return left

    def disjunction(self) -> FormulaPattern:
        f = self.conjunction()
        while self.ts.at("punct", "|"):
            self.ts.advance()
            f = POr(f, self.conjunction())
        return f

    def conjunction(self) -> FormulaPattern:
        f = self.negation()
        while self.ts.at("punct", "&"):
            self.ts.advance()
            f = PAnd(f, self.negation())
        return f

    def negation(self) -> FormulaPattern:
        if self.ts.at("punct", "!"):
            self.ts.advance()
            return PNot(self.negation())
        return self.primary()

    def primary(self) -> FormulaPattern:
        ts = self.ts
        if ts.at("quant"):
            q = ts.advance().text
            if ts.at("schema"):
                tok = ts.advance()
                self.record(tok.text, "term", tok)
                binder = "?" + tok.text
            else:
                binder = ts.eat("ident").text
            if ts.at("punct", "."):
                ts.advance()
            body = self.formula()
            return (PForall if q == "forall" else PExists)(binder, body)
        if ts.at("punct", "("):
            ts.advance()
            f = self.formula()
            ts.eat("punct", ")")
            return f
        if ts.at("ident", "true"):
            ts.advance()
            return PTrue()
        if ts.at("ident", "false"):
            ts.advance()
            return PFalse()
        first, tok = self.operand()
        if ts.at("punct", "="):
            ts.advance()
            lhs = self.as_term(first, tok)
            second, tok2 = self.operand()
            rhs = self.as_term(second, tok2)
            return PEq(lhs, rhs)
        return self.as_formula(first, tok)

    # An operand is `?X`, `_`, IDENT, or IDENT(termpatterns); whether it is
    # a term or a formula is decided by the `=` lookahead in primary.
    def operand(self):
        ts = self.ts
        tok = ts.cur
        if ts.at("schema"):
            ts.advance()
            return ("schema", tok.text, None), tok
        name = ts.eat("ident").text
        if ts.at("punct", "("):
            if name == "_":
                raise ParseError("'_' cannot take arguments", tok.line, tok.col)
            ts.advance()
            args = [self.term()]
            while ts.at("punct", ","):
                ts.advance()
                args.append(self.term())
            ts.eat("punct", ")")
            return ("app", name, tuple(args)), tok
        return ("name", name, None), tok

    def term(self) -> TermPattern:
        operand, tok = self.operand()
        return self.as_term(operand, tok)

    def as_term(self, operand, tok: Tok) -> TermPattern:
        kind, name, args = operand
        if kind == "schema":
            self.record(name, "term", tok)
            return PSchema(name)
        if kind == "app":
            return PApp(name, args)
        if name == "_":
            return PWild()
        return PName(name)

    def as_formula(self, operand, tok: Tok) -> FormulaPattern:
        kind, name, args = operand
        if kind == "schema":
            self.record(name, "formula", tok)
            return PSchema(name)
        if kind == "app":
            return PAtom(name, args)
        if name == "_":
            return PWild()
        return PAtom(name, ())


def parse_sequent_pattern(text: str) -> SequentPattern:
    return _PatternParser(TokenStream(tokenize(text))).sequent()


# ---------------------------------------------------------------------------
# Rendering

def render_term_pattern(p: TermPattern) -> str:
    match p:
        case PWild():
            return "_"
        case PSchema(name):
            return f"?{name}"
        case PName(name):
            return name
        case PApp(fn, args):
            return f"{fn}({', '.join(render_term_pattern(a) for a in args)})"
    raise TypeError(f"not a term pattern: {p!r}")


_PPREC = {PImplies: 1, POr: 2, PAnd: 3, PNot: 4}


def render_formula_pattern(p: FormulaPattern) -> str:
    def go(g, parent_prec: int) -> str:
        match g:
            case PWild():
                return "_"
            case PSchema(name):
                return f"?{name}"
            case PTrue():
                return "true"
            case PFalse():
                return "false"
            case PAtom(pred, args):
                if not args:
                    return pred
                return f"{pred}({', '.join(render_term_pattern(a) for a in args)})"
            case PEq(l, r):
                return f"{render_term_pattern(l)} = {render_term_pattern(r)}"
            case PNot(b):
                return "!" + go(b, _PPREC[PNot])
            case PAnd(l, r):
                s = f"{go(l, _PPREC[PAnd])} & {go(r, _PPREC[PAnd] + 1)}"
                return f"({s})" if parent_prec > _PPREC[PAnd] else s
            case POr(l, r):
                s = f"{go(l, _PPREC[POr])} | {go(r, _PPREC[POr] + 1)}"
                return f"({s})" if parent_prec > _PPREC[POr] else s
            case PImplies(l, r):
                s = f"{go(l, _PPREC[PImplies] + 1)} -> {go(r, _PPREC[PImplies])}"
                return f"({s})" if parent_prec > _PPREC[PImplies] else s
            case PForall(v, b):
                s = f"\\forall {v}. {go(b, 0)}"
                return s if parent_prec == 0 else f"({s})"
            case PExists(v, b):
                s = f"\\exists {v}. {go(b, 0)}"
                return s if parent_prec == 0 else f"({s})"
        raise TypeError(f"not a formula pattern: {g!r}")

    return go(p, 0)


def render_sequent_pattern(p: SequentPattern) -> str:
    left = ", ".join(render_formula_pattern(f) for f in p.ante)
    right = ", ".join(render_formula_pattern(f) for f in p.succ)
    return f"{left} ==> {right}".strip()


def formula_to_pattern(f: Formula) -> FormulaPattern:
    """Exact pattern for a concrete formula: no wildcards, no schema vars."""

    def term(t: Term) -> TermPattern:
        match t:
            case Var(name) | Const(name):
                return PName(name)
            case App(fn, args):
                return PApp(fn, tuple(term(a) for a in args))
        raise TypeError(f"not a term: {t!r}")

    match f:
        case Atom(p, args):
            return PAtom(p, tuple(term(a) for a in args))
        case Eq(l, r):
            return PEq(term(l), term(r))
        case Truth():
            return PTrue()
        case Falsity():
            return PFalse()
        case Not(b):
            return PNot(formula_to_pattern(b))
        case And(l, r):
            return PAnd(formula_to_pattern(l), formula_to_pattern(r))
        case Or(l, r):
            return POr(formula_to_pattern(l), formula_to_pattern(r))
        case Implies(l, r):
            return PImplies(formula_to_pattern(l), formula_to_pattern(r))
        case Forall(v, b):
            return PForall(v, formula_to_pattern(b))
        case Exists(v, b):
            return PExists(v, formula_to_pattern(b))
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Matching

Binding = dict[str, tuple[str, object]]  # name -> (kind, Formula | Term)


@dataclass(frozen=True)
class Match:
    binding: tuple[tuple[str, tuple[str, object]], ...]
    ante_assignment: tuple[int, ...]  # pattern index -> formula index
    succ_assignment: tuple[int, ...]

    def bound(self) -> Binding:
        return {k: v for k, v in self.binding}

    def positions(self) -> list[tuple[int, FormulaPosition]]:
        out = []
        for i, j in enumerate(self.ante_assignment):
            out.append((i, FormulaPosition(ANTE, j)))
        base = len(self.ante_assignment)
        for i, j in enumerate(self.succ_assignment):
            out.append((base + i, FormulaPosition(SUCC, j)))
        return out


@dataclass
class MatchResult:
    matches: list[Match] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.matches)

    @property
    def canonical(self) -> Match | None:
        return self.matches[0] if self.matches else None


def _freeze_binding(b: Binding) -> tuple:
    return tuple(sorted(b.items()))


def match_term(p: TermPattern, t: Term, b: Binding) -> Binding | None:
    match p:
        case PWild():
            return b
        case PSchema(name):
            prev = b.get(name)
            if prev is not None:
                kind, val = prev
                return b if kind == "term" and val == t else None
            out = dict(b)
            out[name] = ("term", t)
            return out
        case PName(name):
            match t:
                case Var(n) | Const(n):
                    return b if n == name else None
            return None
        case PApp(fn, args):
            match t:
                case App(f2, args2) if f2 == fn and len(args2) == len(args):
                    for pa, ta in zip(args, args2):
                        nb = match_term(pa, ta, b)
                        if nb is None:
                            return None
                        b = nb
                    return b
            return None
    return None


def match_formula(p: FormulaPattern, f: Formula, b: Binding) -> Binding | None:
    match p:
        case PWild():
            return b
        case PSchema(name):
            prev = b.get(name)
            if prev is not None:
                kind, val = prev
                return b if kind == "formula" and val == f else None
            out = dict(b)
            out[name] = ("formula", f)
            return out
        case PTrue():
            return b if isinstance(f, Truth) else None
        case PFalse():
            return b if isinstance(f, Falsity) else None
        case PAtom(pred, args):
            match f:
                case Atom(p2, args2) if p2 == pred and len(args2) == len(args):
                    for pa, ta in zip(args, args2):
                        nb = match_term(pa, ta, b)
                        if nb is None:
                            return None
                        b = nb
                    return b
            return None
        case PEq(lp, rp):
            match f:
                case Eq(lt, rt):
                    nb = match_term(lp, lt, b)
                    return match_term(rp, rt, nb) if nb is not None else None
            return None
        case PNot(bp):
            match f:
                case Not(bf):
                    return match_formula(bp, bf, b)
            return None
        case PAnd(lp, rp):
            match f:
                case And(lf, rf):
                    nb = match_formula(lp, lf, b)
                    return match_formula(rp, rf, nb) if nb is not None else None
            return None
        case POr(lp, rp):
            match f:
                case Or(lf, rf):
                    nb = match_formula(lp, lf, b)
                    return match_formula(rp, rf, nb) if nb is not None else None
            return None
        case PImplies(lp, rp):
            match f:
                case Implies(lf, rf):
                    nb = match_formula(lp, lf, b)
                    return match_formula(rp, rf, nb) if nb is not None else None
            return None
        case PForall(binder, bp) | PExists(binder, bp):
            want = Forall if isinstance(p, PForall) else Exists
            if not isinstance(f, want):
                return None
            if _binder_is_schema(binder):
                nb = match_term(PSchema(binder[1:]), Var(f.var), b)
                if nb is None:
                    return None
            else:
                if f.var != binder:
                    return None
                nb = b
            return match_formula(bp, f.body, nb)
    return None


def match_sequent(
    p: SequentPattern, s: Sequent, pre_binding: Binding | None = None
) -> MatchResult:
    """Enumerate every match in lexicographic order of the formula-index
    assignment (antecedent indices first, then succedent).  `pre_binding`
    constrains schema variables bound before matching starts."""
    results: list[Match] = []
    start: Binding = dict(pre_binding) if pre_binding else {}

    def assign(pats, formulas, idx, used, b, chosen, k):
        if idx == len(pats):
            k(b, tuple(chosen))
            return
        for j in range(len(formulas)):
            if j in used:
                continue
            nb = match_formula(pats[idx], formulas[j], b)
            if nb is not None:
                assign(pats, formulas, idx + 1, used | {j}, nb, chosen + [j], k)

    def after_ante(b, ante_choice):
        def done(b2, succ_choice):
            results.append(Match(_freeze_binding(b2), ante_choice, succ_choice))

        assign(p.succ, s.succ, 0, frozenset(), b, [], done)

    assign(p.ante, s.ante, 0, frozenset(), start, [], after_ante)
    return MatchResult(results)


# ---------------------------------------------------------------------------
# Brute-force oracle: independent code path checked against match_sequent

def _walk_eq(pat, node, env: Binding) -> Binding | None:
    """Structural comparison written independently of match_formula/term."""
    if isinstance(pat, PWild):
        return env
    if isinstance(pat, PSchema):
        kind = "term" if isinstance(node, (Var, Const, App)) else "formula"
        if pat.name in env:
            old_kind, old_val = env[pat.name]
            if old_kind != kind or old_val != node:
                return None
            return env
        env2 = dict(env)
        env2[pat.name] = (kind, node)
        return env2
    if isinstance(pat, PName):
        if isinstance(node, (Var, Const)) and node.name == pat.name:
            return env
        return None
    if isinstance(pat, PApp):
        if not isinstance(node, App) or node.func != pat.func:
            return None
        if len(node.args) != len(pat.args):
            return None
        for a, c in zip(pat.args, node.args):
            env = _walk_eq(a, c, env)
            if env is None:
                return None
        return env
    if isinstance(pat, PTrue):
        return env if isinstance(node, Truth) else None
    if isinstance(pat, PFalse):
        return env if isinstance(node, Falsity) else None
    if isinstance(pat, PAtom):
        if not isinstance(node, Atom) or node.pred != pat.pred:
            return None
        if len(node.args) != len(pat.args):
            return None
        for a, c in zip(pat.args, node.args):
            env = _walk_eq(a, c, env)
            if env is None:
                return None
        return env
    if isinstance(pat, PEq):
        if not isinstance(node, Eq):
            return None
        env = _walk_eq(pat.lhs, node.lhs, env)
        if env is None:
            return None
        return _walk_eq(pat.rhs, node.rhs, env)
    if isinstance(pat, PNot):
        if not isinstance(node, Not):
            return None
        return _walk_eq(pat.body, node.body, env)
    if isinstance(pat, (PAnd, POr, PImplies)):
        pairing = {PAnd: And, POr: Or, PImplies: Implies}
        if not isinstance(node, pairing[type(pat)]):
            return None
        env = _walk_eq(pat.left, node.left, env)
        if env is None:
            return None
        return _walk_eq(pat.right, node.right, env)
    if isinstance(pat, (PForall, PExists)):
        if not isinstance(node, Forall if isinstance(pat, PForall) else Exists):
            return None
        if pat.binder.startswith("?"):
            env = _walk_eq(PSchema(pat.binder[1:]), Var(node.var), env)
            if env is None:
                return None
        elif node.var != pat.binder:
            return None
        return _walk_eq(pat.body, node.body, env)
    return None


def brute_force_match(
    p: SequentPattern, s: Sequent, pre_binding: Binding | None = None
) -> MatchResult:
    """Try every injective index assignment on both sides and keep the ones
    whose structural walk succeeds; practical for small inputs only."""
    found: list[Match] = []
    ante_picks = list(itertools.permutations(range(len(s.ante)), len(p.ante)))
    succ_picks = list(itertools.permutations(range(len(s.succ)), len(p.succ)))
    for ante_pick in ante_picks:
        for succ_pick in succ_picks:
            env: Binding | None = dict(pre_binding) if pre_binding else {}
            for pat, j in zip(p.ante, ante_pick):
                env = _walk_eq(pat, s.ante[j], env)
                if env is None:
                    break
            if env is None:
                continue
            for pat, j in zip(p.succ, succ_pick):
                env = _walk_eq(pat, s.succ[j], env)
                if env is None:
                    break
            if env is None:
                continue
            found.append(Match(_freeze_binding(env), ante_pick, succ_pick))
    found.sort(key=lambda m: (m.ante_assignment, m.succ_assignment))
    return MatchResult(found)


def verify_match(p: SequentPattern, s: Sequent, m: Match) -> bool:
    """Re-check one reported match: with its binding fixed up front, each
    pattern must still match the formula at its assigned position."""
    b = m.bound()
    for pats, formulas, assignment in (
        (p.ante, s.ante, m.ante_assignment),
        (p.succ, s.succ, m.succ_assignment),
    ):
        if len(assignment) != len(pats):
            return False
        if len(set(assignment)) != len(assignment):
            return False
        for pat, j in zip(pats, assignment):
            if not 0 <= j < len(formulas):
                return False
            if match_formula(pat, formulas[j], b) != b:
                return False
    return True


# ---------------------------------------------------------------------------
# Distinguishing patterns

def generate_case_pattern(target: Sequent, siblings: list[Sequent]) -> SequentPattern:
    """Smallest exact pattern (no wildcards, no schema vars) that matches the
    target goal and none of its siblings.  Candidates: one succedent formula
    (smallest AST first), one antecedent formula, then formula pairs."""

    def excludes_all(pat: SequentPattern) -> bool:
        return all(not match_sequent(pat, sib) for sib in siblings)

    def candidate(ante_fs: tuple[Formula, ...], succ_fs: tuple[Formula, ...]):
        return SequentPattern(
            tuple(formula_to_pattern(f) for f in ante_fs),
            tuple(formula_to_pattern(f) for f in succ_fs),
        )

    succ_singles = sorted(
        range(len(target.succ)), key=lambda i: (ast_size(target.succ[i]), i)
    )
    ante_singles = sorted(
        range(len(target.ante)), key=lambda i: (ast_size(target.ante[i]), i)
    )
    for i in succ_singles:
        pat = candidate((), (target.succ[i],))
        if excludes_all(pat):
            return pat
    for i in ante_singles:
        pat = candidate((target.ante[i],), ())
        if excludes_all(pat):
            return pat

    pairs = []
    for i, j in itertools.combinations(range(len(target.succ)), 2):
        pairs.append((0, candidate((), (target.succ[i], target.succ[j]))))
    for i in range(len(target.ante)):
        for j in range(len(target.succ)):
            pairs.append((1, candidate((target.ante[i],), (target.succ[j],))))
    for i, j in itertools.combinations(range(len(target.ante)), 2):
        pairs.append((2, candidate((target.ante[i], target.ante[j]), ())))
    ranked = sorted(
        range(len(pairs)),
        key=lambda k: (
            sum(ast_size(f) for f in pairs[k][1].ante + pairs[k][1].succ),
            pairs[k][0],
            k,
        ),
    )
    for k in ranked:
        pat = pairs[k][1]
        if match_sequent(pat, target) and excludes_all(pat):
            return pat
    raise NoDistinguishingPattern(
        "goal cannot be told apart from its siblings by formula containment"
    )
