"""Sequent-calculus rules over an explicit proof tree, plus the built-in
`auto` and `tryclose` strategies.

The tree records every rule application; node ids grow monotonically and
closure propagates to ancestors.  Strategy behaviour is deterministic: the
saturation loop always works on the smallest open leaf and picks rules by
priority class (closing, then non-branching, then fresh-constant, then
branching, then instantiating), scanning the antecedent left to right and
then the succedent.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .fol import (
    ANTE,
    SUCC,
    And,
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
    Or,
    Sequent,
    Signature,
    Term,
    Truth,
    Var,
    ast_size,
    children as node_children,
    fresh_constant,
    ground_subterms,
    is_term,
    render_formula,
    render_term,
    substitute,
)


class CalculusError(LogicError):
    code = "CalculusError"


class NotApplicable(CalculusError):
    code = "NotApplicable"

    def __init__(self, rule: str, reason: str):
        super().__init__(f"{rule}: {reason}")
        self.rule = rule
        self.reason = reason


class NotALeaf(CalculusError):
    code = "NotALeaf"


class GoalAlreadyClosed(CalculusError):
    code = "GoalAlreadyClosed"


class MissingArgument(CalculusError):
    code = "MissingArgument"


class NoSuchQuantifier(CalculusError):
    code = "NoSuchQuantifier"


class AmbiguousQuantifier(CalculusError):
    code = "AmbiguousQuantifier"


CLOSING_RULES = ("closeAxiom", "closeTrue", "closeFalse", "eqClose")
ALPHA_RULES = ("notLeft", "notRight", "andLeft", "orRight", "impRight")
DELTA_RULES = ("allRight", "exLeft")
BETA_RULES = ("andRight", "orLeft", "impLeft")
GAMMA_RULES = ("allLeft", "exRight")

RULE_REGISTRY: dict[str, tuple[str, ...]] = {
    "closeAxiom": (),
    "closeTrue": (),
    "closeFalse": (),
    "eqClose": (),
    "notLeft": (),
    "notRight": (),
    "andLeft": (),
    "andRight": (),
    "orLeft": (),
    "orRight": (),
    "impLeft": (),
    "impRight": (),
    "allLeft": ("with",),
    "allRight": (),
    "exLeft": (),
    "exRight": ("with",),
    "cut": ("formula",),
    "applyEq": ("eq",),
    "instantiate": ("var", "with"),
}


@dataclass(frozen=True)
class RuleApplication:
    rule_name: str
    position: FormulaPosition | None = None
    arguments: tuple[tuple[str, object], ...] = ()
    produced: tuple[int, ...] = ()

    def args(self) -> dict[str, object]:
        return dict(self.arguments)

    def render(self) -> str:
        parts = [self.rule_name]
        if self.position is not None:
            parts.append(f"@{self.position.render()}")
        for k, v in self.arguments:
            if is_term(v):
                parts.append(f"{k}={render_term(v)}")
            elif isinstance(
                v, (Atom, Eq, Truth, Falsity, Not, And, Or, Implies, Forall, Exists)
            ):
                parts.append(f"{k}={render_formula(v)}")
            else:
                parts.append(f"{k}={v}")
        return " ".join(parts)


@dataclass
class ProofNode:
    id: int
    sequent: Sequent
    rule: RuleApplication | None = None
    children: list[int] = field(default_factory=list)
    parent: int | None = None
    closed: bool = False
    branch_label: str | None = None

    def is_leaf(self) -> bool:
        return not self.children

    def is_open_leaf(self) -> bool:
        return not self.children and not self.closed


@dataclass
class StrategyResult:
    closed_leaves: list[int]
    open_leaves: list[int]
    steps_used: int
    subtree_root: int


class ProofTree:
    def __init__(self, root_sequent: Sequent, signature: Signature):
        self.signature = signature
        self.nodes: dict[int, ProofNode] = {}
        self.next_id = 0
        self.root_id = self._new_node(root_sequent, parent=None)

    def _new_node(self, sequent: Sequent, parent: int | None, label: str | None = None) -> int:
        nid = self.next_id
        self.next_id += 1
        self.nodes[nid] = ProofNode(nid, sequent, parent=parent, branch_label=label)
        return nid

    def node(self, nid: int) -> ProofNode:
        if nid not in self.nodes:
            raise CalculusError(f"no node {nid}")
        return self.nodes[nid]

    def open_leaves(self, under: int | None = None) -> list[int]:
        if under is None:
            return sorted(n.id for n in self.nodes.values() if n.is_open_leaf())
        out = []
        stack = [under]
        while stack:
            n = self.node(stack.pop())
            if n.is_open_leaf():
                out.append(n.id)
            stack.extend(n.children)
        return sorted(out)

    def subtree_ids(self, under: int) -> list[int]:
        out = []
        stack = [under]
        while stack:
            n = self.node(stack.pop())
            out.append(n.id)
            stack.extend(n.children)
        return sorted(out)

    def _propagate_closure(self, nid: int | None):
        while nid is not None:
            n = self.node(nid)
            if n.children and all(self.node(c).closed for c in n.children):
                if n.closed:
                    break
                n.closed = True
                nid = n.parent
            else:
                break

    def attach(
        self,
        nid: int,
        app_name: str,
        position: FormulaPosition | None,
        arguments: dict[str, object],
        branches: list[tuple[Sequent, str | None]],
        closing: bool,
    ) -> list[int]:
        node = self.node(nid)
        new_ids = [self._new_node(seq, nid, label) for seq, label in branches]
        node.rule = RuleApplication(
            app_name,
            position,
            tuple(sorted(arguments.items())),
            tuple(new_ids),
        )
        node.children = list(new_ids)
        if closing:
            node.closed = True
            self._propagate_closure(node.parent)
        return new_ids

    def canonical_doc(self) -> str:
        lines = []
        for nid in sorted(self.nodes):
            n = self.nodes[nid]
            rule = n.rule.render() if n.rule else "-"
            lines.append(
                f"n{n.id} parent={n.parent} closed={int(n.closed)} "
                f"label={n.branch_label or '-'} rule={rule} "
                f"children={n.children} seq={n.sequent.render()}"
            )
        lines.append(f"next={self.next_id}")
        lines.append(f"consts={sorted(self.signature.constants)}")
        return "\n".join(lines)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_doc().encode()).hexdigest()

    def clone(self) -> "ProofTree":
        t = ProofTree.__new__(ProofTree)
        t.signature = self.signature.clone()
        t.nodes = {
            nid: ProofNode(
                n.id, n.sequent, n.rule, list(n.children), n.parent, n.closed, n.branch_label
            )
            for nid, n in self.nodes.items()
        }
        t.next_id = self.next_id
        t.root_id = self.root_id
        return t


# ---------------------------------------------------------------------------
# Single-rule application

def _require_open_leaf(tree: ProofTree, nid: int) -> ProofNode:
    node = tree.node(nid)
    if node.children:
        raise NotALeaf(f"node {nid} already has a rule applied")
    if node.closed:
        raise GoalAlreadyClosed(f"goal {nid} is closed")
    return node


def _remove(side: tuple[Formula, ...], i: int) -> tuple[Formula, ...]:
    return side[:i] + side[i + 1 :]


def _replace(side: tuple[Formula, ...], i: int, *fs: Formula) -> tuple[Formula, ...]:
    return side[:i] + fs + side[i + 1 :]


def _rule_side(rule: str) -> str:
    return ANTE if rule in (
        "notLeft", "andLeft", "orLeft", "impLeft", "exLeft", "allLeft", "closeFalse"
    ) else SUCC


_RULE_SHAPE = {
    "notLeft": Not,
    "notRight": Not,
    "andLeft": And,
    "andRight": And,
    "orLeft": Or,
    "orRight": Or,
    "impLeft": Implies,
    "impRight": Implies,
    "allLeft": Forall,
    "allRight": Forall,
    "exLeft": Exists,
    "exRight": Exists,
    "closeTrue": Truth,
    "closeFalse": Falsity,
}


def _eligible_indices(seq: Sequent, rule: str) -> list[int]:
    """Indices on the rule's own side whose formula has the principal shape."""
    side = seq.side(_rule_side(rule))
    if rule == "closeAxiom":
        return [i for i, f in enumerate(side) if f in seq.ante]
    if rule == "eqClose":
        return [i for i, f in enumerate(side) if isinstance(f, Eq) and f.lhs == f.rhs]
    shape = _RULE_SHAPE[rule]
    return [i for i, f in enumerate(side) if isinstance(f, shape)]


def _pick_position(
    seq: Sequent, rule: str, position: FormulaPosition | None
) -> FormulaPosition:
    side_name = _rule_side(rule)
    if position is None:
        idxs = _eligible_indices(seq, rule)
        if not idxs:
            raise NotApplicable(rule, "no formula of the required shape")
        return FormulaPosition(side_name, idxs[0])
    if position.inner_path:
        raise NotApplicable(rule, "rule applies to whole formulas only")
    if position.side != side_name:
        raise NotApplicable(rule, f"rule works on the {side_name}cedent side")
    if position.index not in _eligible_indices(seq, rule):
        raise NotApplicable(rule, f"formula at {position.render()} has the wrong shape")
    return position


def _replace_inner(node, path: tuple[int, ...], replacement):
    if not path:
        return replacement
    kids = list(node_children(node))
    i = path[0]
    kids[i] = _replace_inner(kids[i], path[1:], replacement)
    match node:
        case App(fn, _):
            return App(fn, tuple(kids))
        case Atom(p, _):
            return Atom(p, tuple(kids))
        case Eq(_, _):
            return Eq(kids[0], kids[1])
        case Not(_):
            return Not(kids[0])
        case And(_, _):
            return And(kids[0], kids[1])
        case Or(_, _):
            return Or(kids[0], kids[1])
        case Implies(_, _):
            return Implies(kids[0], kids[1])
        case Forall(v, _):
            return Forall(v, kids[0])
        case Exists(v, _):
            return Exists(v, kids[0])
    raise TypeError(f"cannot rebuild {node!r}")


def _delta_base(var: str) -> str:
    return var.lower()


def apply_rule(
    tree: ProofTree,
    nid: int,
    rule: str,
    position: FormulaPosition | None = None,
    arguments: dict[str, object] | None = None,
) -> list[int]:
    """Apply one calculus rule; returns the new leaf ids (empty for closing
    rules).  Position defaults to the leftmost eligible formula."""
    if rule == "instantiate":
        args = arguments or {}
        if "var" not in args or "with" not in args:
            raise MissingArgument("instantiate needs var= and with=")
        return [instantiate(tree, nid, str(args["var"]), args["with"])]
    if rule not in RULE_REGISTRY:
        raise NotApplicable(rule, "unknown rule")
    node = _require_open_leaf(tree, nid)
    seq = node.sequent
    args = arguments or {}
    for req in RULE_REGISTRY[rule]:
        if req not in args:
            raise MissingArgument(f"{rule} needs {req}=")

    if rule == "cut":
        f = args["formula"]
        branches = [
            (Sequent(seq.ante + (f,), seq.succ), "assume"),
            (Sequent(seq.ante, seq.succ + (f,)), "show"),
        ]
        return tree.attach(nid, rule, None, args, branches, closing=False)

    if rule == "applyEq":
        return _apply_eq(tree, nid, position, args)

    if rule == "closeAxiom":
        pos = _pick_position(seq, rule, position)
        return tree.attach(nid, rule, pos, {}, [], closing=True)
    if rule in ("closeTrue", "closeFalse", "eqClose"):
        pos = _pick_position(seq, rule, position)
        return tree.attach(nid, rule, pos, {}, [], closing=True)

    pos = _pick_position(seq, rule, position)
    i = pos.index
    ante, succ = seq.ante, seq.succ

    if rule == "notLeft":
        f = ante[i]
        branches = [(Sequent(_remove(ante, i), succ + (f.body,)), None)]
    elif rule == "notRight":
        f = succ[i]
        branches = [(Sequent(ante + (f.body,), _remove(succ, i)), None)]
    elif rule == "andLeft":
        f = ante[i]
        branches = [(Sequent(_replace(ante, i, f.left, f.right), succ), None)]
    elif rule == "orRight":
        f = succ[i]
        branches = [(Sequent(ante, _replace(succ, i, f.left, f.right)), None)]
    elif rule == "impRight":
        f = succ[i]
        branches = [(Sequent(ante + (f.left,), _replace(succ, i, f.right)), None)]
    elif rule == "andRight":
        f = succ[i]
        branches = [
            (Sequent(ante, _replace(succ, i, f.left)), "left conjunct"),
            (Sequent(ante, _replace(succ, i, f.right)), "right conjunct"),
        ]
    elif rule == "orLeft":
        f = ante[i]
        branches = [
            (Sequent(_replace(ante, i, f.left), succ), "left disjunct"),
            (Sequent(_replace(ante, i, f.right), succ), "right disjunct"),
        ]
    elif rule == "impLeft":
        f = ante[i]
        branches = [
            (Sequent(_remove(ante, i), succ + (f.left,)), "antecedent"),
            (Sequent(_replace(ante, i, f.right), succ), "consequent"),
        ]
    elif rule == "allRight":
        f = succ[i]
        c = Const(fresh_constant(tree.signature, _delta_base(f.var)))
        branches = [(Sequent(ante, _replace(succ, i, substitute(f.body, f.var, c))), None)]
    elif rule == "exLeft":
        f = ante[i]
        c = Const(fresh_constant(tree.signature, _delta_base(f.var)))
        branches = [(Sequent(_replace(ante, i, substitute(f.body, f.var, c)), succ), None)]
    elif rule == "allLeft":
        f = ante[i]
        inst = substitute(f.body, f.var, args["with"])
        branches = [(Sequent(ante + (inst,), succ), None)]
    elif rule == "exRight":
        f = succ[i]
        inst = substitute(f.body, f.var, args["with"])
        branches = [(Sequent(ante, succ + (inst,)), None)]
    else:
        raise NotApplicable(rule, "unknown rule")

    keep_args = {k: v for k, v in args.items() if k in RULE_REGISTRY[rule]}
    return tree.attach(nid, rule, pos, keep_args, branches, closing=False)


def _apply_eq(
    tree: ProofTree, nid: int, position: FormulaPosition | None, args: dict
) -> list[int]:
    node = _require_open_leaf(tree, nid)
    seq = node.sequent
    try:
        eq_index = int(args["eq"])
    except (TypeError, ValueError):
        raise NotApplicable("applyEq", "eq= must be an antecedent index") from None
    if not 0 <= eq_index < len(seq.ante) or not isinstance(seq.ante[eq_index], Eq):
        raise NotApplicable("applyEq", f"antecedent {eq_index} is not an equality")
    eq: Eq = seq.ante[eq_index]
    if position is None or not position.inner_path:
        raise NotApplicable("applyEq", "needs a position addressing a term occurrence")
    side = seq.side(position.side)
    if not 0 <= position.index < len(side):
        raise NotApplicable("applyEq", f"no formula at {position.render()}")
    target_formula = side[position.index]
    here = target_formula
    for step in position.inner_path:
        kids = node_children(here)
        if not 0 <= step < len(kids):
            raise NotApplicable("applyEq", "position leaves the formula")
        here = kids[step]
    if not is_term(here) or here != eq.lhs:
        raise NotApplicable(
            "applyEq", f"occurrence is not the left-hand side {render_term(eq.lhs)}"
        )
    rebuilt = _replace_inner(target_formula, position.inner_path, eq.rhs)
    if position.side == ANTE:
        new_seq = Sequent(_replace(seq.ante, position.index, rebuilt), seq.succ)
    else:
        new_seq = Sequent(seq.ante, _replace(seq.succ, position.index, rebuilt))
    return tree.attach(nid, "applyEq", position, {"eq": eq_index}, [(new_seq, None)], closing=False)


def instantiate(tree: ProofTree, nid: int, var_name: str, witness: Term) -> int:
    """Replace the unique top-level succedent Exists / antecedent Forall that
    binds var_name by its body with the witness substituted; the quantified
    formula is consumed."""
    node = _require_open_leaf(tree, nid)
    seq = node.sequent
    candidates: list[FormulaPosition] = []
    for i, f in enumerate(seq.ante):
        if isinstance(f, Forall) and f.var == var_name:
            candidates.append(FormulaPosition(ANTE, i))
    for j, f in enumerate(seq.succ):
        if isinstance(f, Exists) and f.var == var_name:
            candidates.append(FormulaPosition(SUCC, j))
    if not candidates:
        raise NoSuchQuantifier(f"no instantiable quantifier binds '{var_name}'")
    if len(candidates) > 1:
        raise AmbiguousQuantifier(
            f"{len(candidates)} top-level quantifiers bind '{var_name}'"
        )
    pos = candidates[0]
    f = seq.side(pos.side)[pos.index]
    inst = substitute(f.body, f.var, witness)
    if pos.side == ANTE:
        new_seq = Sequent(_replace(seq.ante, pos.index, inst), seq.succ)
    else:
        new_seq = Sequent(seq.ante, _replace(seq.succ, pos.index, inst))
    new_ids = tree.attach(
        nid, "instantiate", pos, {"var": var_name, "with": witness}, [(new_seq, None)], closing=False
    )
    return new_ids[0]


def applicable_rules(
    tree: ProofTree, nid: int, position: FormulaPosition | None = None
) -> list[tuple[str, tuple[str, ...]]]:
    """Rules that would not raise NotApplicable here, sorted by name."""
    node = tree.node(nid)
    if node.children or node.closed:
        raise NotALeaf(f"node {nid} is not an open goal")
    seq = node.sequent
    out: list[tuple[str, tuple[str, ...]]] = []

    def unambiguous_var(var: str) -> bool:
        hits = sum(
            1 for f in seq.ante if isinstance(f, Forall) and f.var == var
        ) + sum(1 for f in seq.succ if isinstance(f, Exists) and f.var == var)
        return hits == 1

    def formula_rules_at(side: str, index: int) -> list[str]:
        f = seq.side(side)[index]
        names = []
        for rule, shape in _RULE_SHAPE.items():
            if _rule_side(rule) == side and isinstance(f, shape):
                names.append(rule)
        if side == SUCC and isinstance(f, Eq) and f.lhs == f.rhs:
            names.append("eqClose")
        if side == SUCC and f in seq.ante:
            names.append("closeAxiom")
        if side == ANTE and isinstance(f, Forall) and unambiguous_var(f.var):
            names.append("instantiate")
        if side == SUCC and isinstance(f, Exists) and unambiguous_var(f.var):
            names.append("instantiate")
        return names

    if position is not None and not position.inner_path:
        if not 0 <= position.index < len(seq.side(position.side)):
            raise CalculusError(f"no formula at {position.render()}")
        names = set(formula_rules_at(position.side, position.index))
    elif position is not None:
        # inner positions: term occurrences can be rewritten by an equality
        names = set()
        target = None
        try:
            from .fol import resolve_position

            target = resolve_position(seq, position)
        except LogicError:
            target = None
        if target is not None and is_term(target):
            if any(isinstance(f, Eq) and f.lhs == target for f in seq.ante):
                names.add("applyEq")
    else:
        names = {"cut"}
        for side in (ANTE, SUCC):
            for i in range(len(seq.side(side))):
                names.update(formula_rules_at(side, i))
        if any(isinstance(f, Eq) for f in seq.ante):
            # whether some occurrence matches is position-dependent; offer it
            for f in seq.ante:
                if isinstance(f, Eq):
                    occurrences = [
                        t for t in _all_term_occurrences(seq) if t == f.lhs
                    ]
                    if occurrences:
                        names.add("applyEq")
                        break
    out = sorted((n, RULE_REGISTRY[n]) for n in names)
    return out


def _all_term_occurrences(seq: Sequent):
    for side in (seq.ante, seq.succ):
        for f in side:
            stack = [f]
            while stack:
                n = stack.pop()
                if is_term(n):
                    yield n
                stack.extend(node_children(n))


# ---------------------------------------------------------------------------
# Strategies

def _closing_move(seq: Sequent) -> tuple[str, FormulaPosition] | None:
    for j, f in enumerate(seq.succ):
        if f in seq.ante:
            return ("closeAxiom", FormulaPosition(SUCC, j))
    for j, f in enumerate(seq.succ):
        if isinstance(f, Truth):
            return ("closeTrue", FormulaPosition(SUCC, j))
    for i, f in enumerate(seq.ante):
        if isinstance(f, Falsity):
            return ("closeFalse", FormulaPosition(ANTE, i))
    for j, f in enumerate(seq.succ):
        if isinstance(f, Eq) and f.lhs == f.rhs:
            return ("eqClose", FormulaPosition(SUCC, j))
    return None


_ALPHA_BY_SIDE = {
    ANTE: ((Not, "notLeft"), (And, "andLeft")),
    SUCC: ((Not, "notRight"), (Or, "orRight"), (Implies, "impRight")),
}
_DELTA_BY_SIDE = {ANTE: ((Exists, "exLeft"),), SUCC: ((Forall, "allRight"),)}
_BETA_BY_SIDE = {ANTE: ((Or, "orLeft"), (Implies, "impLeft")), SUCC: ((And, "andRight"),)}


def _shape_move(seq: Sequent, table) -> tuple[str, FormulaPosition] | None:
    for side in (ANTE, SUCC):
        for i, f in enumerate(seq.side(side)):
            for shape, rule in table[side]:
                if isinstance(f, shape):
                    return (rule, FormulaPosition(side, i))
    return None


def _gamma_pool(seq: Sequent, sig: Signature, var: str) -> list[Term]:
    seen = []
    for side in (seq.ante, seq.succ):
        for f in side:
            for t in ground_subterms(f):
                if t not in seen:
                    seen.append(t)
    if not seen:
        return [Const(fresh_constant(sig, _delta_base(var)))]
    return sorted(seen, key=lambda t: (ast_size(t), render_term(t)))


def auto_strategy(
    tree: ProofTree, nid: int, budget: int, inst_limit: int
) -> StrategyResult:
    """Deterministic saturation under node `nid`.

    Worklist is the smallest open leaf; priority: closing, alpha, delta,
    beta, then gamma.  Gamma rules retain the quantified formula, take every
    ground term of the goal (one fresh constant when there are none), and run
    at most inst_limit rounds per quantified formula per branch.
    """
    _require_open_leaf(tree, nid)
    steps = 0
    closed: list[int] = []
    # gamma bookkeeping per leaf, inherited on replacement/branching
    rounds: dict[int, dict] = {nid: {}}
    used: dict[int, dict] = {nid: {}}

    def inherit(parent: int, kids: list[int]):
        r, u = rounds.pop(parent, {}), used.pop(parent, {})
        for k in kids:
            rounds[k] = dict(r)
            used[k] = {key: set(v) for key, v in u.items()}

    def leaf_move(leaf: int):
        seq = tree.node(leaf).sequent
        move = _closing_move(seq)
        if move:
            return ("close", move)
        move = _shape_move(seq, _ALPHA_BY_SIDE)
        if move:
            return ("alpha", move)
        move = _shape_move(seq, _DELTA_BY_SIDE)
        if move:
            return ("delta", move)
        move = _shape_move(seq, _BETA_BY_SIDE)
        if move:
            return ("beta", move)
        r = rounds.setdefault(leaf, {})
        u = used.setdefault(leaf, {})
        for side, rule in ((ANTE, "allLeft"), (SUCC, "exRight")):
            shape = Forall if rule == "allLeft" else Exists
            for i, f in enumerate(seq.side(side)):
                if not isinstance(f, shape):
                    continue
                key = (side, f)
                if r.get(key, 0) >= inst_limit:
                    continue
                pool = _gamma_pool(seq, tree.signature, f.var)
                fresh_terms = [t for t in pool if t not in u.get(key, set())]
                if not fresh_terms:
                    continue
                return ("gamma", (rule, FormulaPosition(side, i), key, fresh_terms))
        return None

    while steps < budget:
        leaves = tree.open_leaves(under=nid)
        if not leaves:
            break
        acted = False
        for leaf in leaves:
            move = leaf_move(leaf)
            if move is None:
                continue
            kind, payload = move
            if kind == "gamma":
                rule, pos, key, fresh_terms = payload
                cur = leaf
                for t in fresh_terms:
                    if steps >= budget:
                        break
                    new_ids = apply_rule(tree, cur, rule, pos, {"with": t})
                    steps += 1
                    inherit(cur, new_ids)
                    nxt = new_ids[0]
                    used[nxt].setdefault(key, set()).add(t)
                    cur = nxt
                if cur != leaf:
                    rounds[cur][key] = rounds[cur].get(key, 0) + 1
            else:
                rule, pos = payload
                new_ids = apply_rule(tree, leaf, rule, pos)
                steps += 1
                if kind == "close":
                    closed.append(leaf)
                    rounds.pop(leaf, None)
                    used.pop(leaf, None)
                else:
                    inherit(leaf, new_ids)
            acted = True
            break
        if not acted:
            break

    return StrategyResult(
        closed_leaves=closed,
        open_leaves=tree.open_leaves(under=nid),
        steps_used=steps,
        subtree_root=nid,
    )


def try_close(tree: ProofTree, nid: int, budget: int, inst_limit: int) -> bool:
    """Run auto under the node; keep the subtree only if everything closed,
    otherwise restore the tree exactly (including the signature)."""
    node = _require_open_leaf(tree, nid)
    saved_next = tree.next_id
    saved_sig = tree.signature.clone()
    auto_strategy(tree, nid, budget, inst_limit)
    if not tree.open_leaves(under=nid):
        return True
    for stale in [i for i in tree.nodes if i >= saved_next]:
        del tree.nodes[stale]
    node.rule = None
    node.children = []
    node.closed = False
    up = node.parent
    while up is not None:
        parent = tree.node(up)
        if not parent.closed:
            break
        parent.closed = False
        up = parent.parent
    tree.signature.constants = saved_sig.constants
    tree.signature.functions = saved_sig.functions
    tree.signature.predicates = saved_sig.predicates
    tree.next_id = saved_next
    return False
