"""Logic kernel: parsing, printing, substitution, positions."""

import pytest
from hypothesis import given, settings, strategies as st

from psdbg.fol import (
    ANTE,
    SUCC,
    And,
    App,
    ArityMismatch,
    Atom,
    Const,
    Eq,
    Exists,
    FALSE,
    Forall,
    FormulaPosition,
    Implies,
    Not,
    Or,
    ParseError,
    Sequent,
    Signature,
    TRUE,
    UndeclaredSymbol,
    Var,
    alpha_eq,
    ast_size,
    enumerate_positions,
    free_vars,
    fresh_constant,
    ground_subterms,
    parse_formula,
    parse_problem,
    parse_term,
    render_formula,
    render_term,
    resolve_position,
    substitute,
)


def sig_pq() -> Signature:
    sig = Signature()
    sig.declare_pred("p", 0)
    sig.declare_pred("q", 0)
    sig.declare_pred("r", 0)
    return sig


def sig_rich() -> Signature:
    sig = Signature()
    sig.declare_const("a")
    sig.declare_const("b")
    sig.declare_fun("f", 1)
    sig.declare_fun("g", 2)
    sig.declare_pred("p", 1)
    sig.declare_pred("q", 2)
    sig.declare_pred("s", 0)
    return sig


class TestParseProblem:
    def test_conjunction_swap(self):
        prob = parse_problem("pred p/0; pred q/0; conjecture p & q -> q & p;")
        assert prob.conjecture == Implies(And(Atom("p"), Atom("q")), And(Atom("q"), Atom("p")))
        assert prob.assumptions == []
        assert prob.root_sequent() == Sequent((), (prob.conjecture,))

    def test_existential(self):
        prob = parse_problem("const a; pred p/1; conjecture p(a) -> (\\exists X. p(X));")
        assert prob.conjecture == Implies(
            Atom("p", (Const("a"),)), Exists("X", Atom("p", (Var("X"),)))
        )

    def test_undeclared_symbol(self):
        with pytest.raises(UndeclaredSymbol) as exc:
            parse_problem("pred p/1; conjecture p(a);")
        assert exc.value.name == "a"
        assert exc.value.line == 1

    def test_assumptions_in_order(self):
        prob = parse_problem(
            "pred p/0; pred q/0;\nassume p;\nassume q;\nconjecture p & q;"
        )
        assert prob.assumptions == [Atom("p"), Atom("q")]
        assert prob.root_sequent().ante == (Atom("p"), Atom("q"))

    def test_arity_mismatch(self):
        with pytest.raises(ArityMismatch):
            parse_problem("pred p/2; const a; conjecture p(a);")

    def test_duplicate_declaration(self):
        with pytest.raises(ParseError):
            parse_problem("pred p/0; const p; conjecture p;")

    def test_missing_conjecture(self):
        with pytest.raises(ParseError):
            parse_problem("pred p/0; assume p;")

    def test_comment_and_whitespace(self):
        prob = parse_problem("// a puzzle\npred p/0;   conjecture\n p;")
        assert prob.conjecture == Atom("p")

    def test_keyword_not_declarable(self):
        with pytest.raises(ParseError):
            parse_problem("const true; conjecture true;")


class TestParseFormula:
    def test_implies_binds_loosest(self):
        f = parse_formula("p & q -> q", sig_pq())
        assert f == Implies(And(Atom("p"), Atom("q")), Atom("q"))

    def test_not_binds_tightest(self):
        f = parse_formula("!p | q", sig_pq())
        assert f == Or(Not(Atom("p")), Atom("q"))

    def test_quantifier_max_scope(self):
        sig = Signature()
        sig.declare_pred("p", 1)
        sig.declare_pred("q", 0)
        f = parse_formula("\\forall X. p(X) -> q", sig)
        assert f == Forall("X", Implies(Atom("p", (Var("X"),)), Atom("q")))

    def test_implies_right_assoc(self):
        f = parse_formula("p -> q -> r", sig_pq())
        assert f == Implies(Atom("p"), Implies(Atom("q"), Atom("r")))

    def test_and_or_precedence(self):
        f = parse_formula("p | q & r", sig_pq())
        assert f == Or(Atom("p"), And(Atom("q"), Atom("r")))

    def test_equality_atom(self):
        f = parse_formula("f(a) = b", sig_rich())
        assert f == Eq(App("f", (Const("a"),)), Const("b"))

    def test_equality_inside_connective(self):
        f = parse_formula("a = b & s", sig_rich())
        assert f == And(Eq(Const("a"), Const("b")), Atom("s"))

    def test_true_false(self):
        assert parse_formula("true -> false", sig_pq()) == Implies(TRUE, FALSE)

    def test_scoping_decides_var_vs_const(self):
        sig = sig_rich()
        f = parse_formula("\\exists a. p(a)", sig)
        assert f == Exists("a", Atom("p", (Var("a"),)))
        assert parse_formula("p(a)", sig) == Atom("p", (Const("a"),))

    def test_unbound_identifier_rejected(self):
        with pytest.raises(UndeclaredSymbol):
            parse_formula("p(X)", sig_rich())


class TestSubstitute:
    def test_base_case(self):
        f = Atom("p", (Var("X"),))
        assert substitute(f, "X", Const("a")) == Atom("p", (Const("a"),))

    def test_capture_avoidance_renames(self):
        f = Exists("Y", Atom("q", (Var("X"), Var("Y"))))
        got = substitute(f, "X", Var("Y"))
        assert got == Exists("Y1", Atom("q", (Var("Y"), Var("Y1"))))

    def test_no_free_occurrence(self):
        f = Atom("p", (Var("Z"),))
        assert substitute(f, "X", Const("a")) == f

    def test_shadowing_stops_substitution(self):
        f = Forall("X", Atom("p", (Var("X"),)))
        assert substitute(f, "X", Const("a")) == f

    def test_substitute_under_binder_without_capture(self):
        f = Forall("Y", Atom("q", (Var("X"), Var("Y"))))
        got = substitute(f, "X", Const("a"))
        assert got == Forall("Y", Atom("q", (Const("a"), Var("Y"))))


class TestFreshConstant:
    def test_base_unused(self):
        sig = Signature()
        assert fresh_constant(sig, "i") == "i"

    def test_first_free_suffix(self):
        sig = Signature()
        sig.declare_const("i")
        sig.declare_const("i_0")
        assert fresh_constant(sig, "i") == "i_1"

    def test_registration_is_persistent(self):
        sig = Signature()
        assert fresh_constant(sig, "c") == "c"
        assert fresh_constant(sig, "c") == "c_0"
        assert sig.declared("c_0")


class TestPositions:
    def make(self) -> Sequent:
        sig = sig_rich()
        return Sequent(
            (parse_formula("p(a) & s", sig),),
            (parse_formula("q(a, b)", sig), parse_formula("s", sig)),
        )

    def test_whole_formula(self):
        seq = self.make()
        pos = FormulaPosition(ANTE, 0)
        assert resolve_position(seq, pos) == seq.ante[0]

    def test_inner_path_reaches_term(self):
        seq = self.make()
        pos = FormulaPosition(SUCC, 0, (1,))
        assert resolve_position(seq, pos) == Const("b")

    def test_bad_index(self):
        from psdbg.fol import BadPosition

        with pytest.raises(BadPosition):
            resolve_position(self.make(), FormulaPosition(SUCC, 5))

    def test_parse_render_round_trip(self):
        pos = FormulaPosition(SUCC, 0, (1, 0))
        assert FormulaPosition.parse(pos.render()) == pos
        assert FormulaPosition.parse("ante:2") == FormulaPosition(ANTE, 2)

    def test_enumeration_readdresses(self):
        seq = self.make()
        for pos in enumerate_positions(seq):
            node = resolve_position(seq, pos)
            assert node is not None


class TestRendering:
    def test_needs_parens_on_right_and(self):
        f = And(Atom("p"), And(Atom("q"), Atom("r")))
        assert render_formula(f) == "p & (q & r)"

    def test_no_parens_left_assoc(self):
        f = And(And(Atom("p"), Atom("q")), Atom("r"))
        assert render_formula(f) == "p & q & r"

    def test_terms(self):
        t = App("g", (App("f", (Const("a"),)), Var("X")))
        assert render_term(t) == "g(f(a), X)"

    def test_sequent(self):
        seq = Sequent((Atom("p"),), (Atom("q"), Atom("r")))
        assert seq.render() == "p ==> q, r"
        assert Sequent((), (Atom("p"),)).render() == "==> p"


class TestMisc:
    def test_ast_size(self):
        f = parse_formula("p(a) & s", sig_rich())
        # And, Atom p, Const a, Atom s
        assert ast_size(f) == 4

    def test_free_vars(self):
        f = Exists("Y", Atom("q", (Var("X"), Var("Y"))))
        assert free_vars(f) == {"X"}

    def test_ground_subterms(self):
        sig = sig_rich()
        f = parse_formula("\\exists X. q(f(a), X)", sig)
        grounds = ground_subterms(f)
        assert App("f", (Const("a"),)) in grounds
        assert Const("a") in grounds
        assert Var("X") not in grounds

    def test_alpha_eq(self):
        f = Forall("X", Atom("p", (Var("X"),)))
        g = Forall("Z", Atom("p", (Var("Z"),)))
        assert alpha_eq(f, g)
        assert not alpha_eq(f, Forall("X", Atom("p", (Const("a"),))))


# ---------------------------------------------------------------------------
# Random formulas for the property tests

def formulas(sig: Signature, max_depth: int = 6):
    terms = st.recursive(
        st.sampled_from([Const("a"), Const("b"), Var("X"), Var("Y")]),
        lambda kids: st.builds(App, st.just("f"), st.tuples(kids))
        | st.builds(App, st.just("g"), st.tuples(kids, kids)),
        max_leaves=4,
    )
    atoms = (
        st.builds(Atom, st.just("p"), st.tuples(terms))
        | st.builds(Atom, st.just("q"), st.tuples(terms, terms))
        | st.just(Atom("s"))
        | st.builds(Eq, terms, terms)
        | st.just(TRUE)
        | st.just(FALSE)
    )

    def close_binders(depth):
        base = atoms
        for _ in range(depth):
            base = (
                base
                | st.builds(Not, base)
                | st.builds(And, base, base)
                | st.builds(Or, base, base)
                | st.builds(Implies, base, base)
                | st.builds(Forall, st.sampled_from(["X", "Y"]), base)
                | st.builds(Exists, st.sampled_from(["X", "Y"]), base)
            )
        return base

    def close(f):
        for v in sorted(free_vars(f)):
            f = Forall(v, f)
        return f

    return close_binders(max_depth // 2).map(close)


@given(formulas(sig_rich()))
@settings(max_examples=200, deadline=None)
def test_parse_print_round_trip(f):
    assert parse_formula(render_formula(f), sig_rich()) == f


@given(formulas(sig_rich()), st.sampled_from(["X", "Y"]), st.sampled_from([Const("a"), App("f", (Const("b"),))]))
@settings(max_examples=100, deadline=None)
def test_substitution_ground_then_print(f, var, t):
    got = substitute(f, var, t)
    assert parse_formula(render_formula(got), sig_rich()) == got
    assert var not in free_vars(got)


@given(formulas(sig_rich()))
@settings(max_examples=100, deadline=None)
def test_disjoint_substitutions_commute(f):
    a, b = Const("a"), Const("b")
    one = substitute(substitute(f, "X", a), "Y", b)
    two = substitute(substitute(f, "Y", b), "X", a)
    assert one == two


@given(formulas(sig_rich()), formulas(sig_rich()))
@settings(max_examples=60, deadline=None)
def test_position_enumeration_resolves_and_readdresses(f, g):
    seq = Sequent((f,), (g, f))
    seen = set()
    for pos in enumerate_positions(seq):
        resolve_position(seq, pos)
        key = (pos.side, pos.index, pos.inner_path)
        assert key not in seen
        seen.add(key)
    assert FormulaPosition(ANTE, 0) in enumerate_positions(seq)
