"""Small-step script execution over proof states.

The machine rests at statement boundaries.  Each executeStatement call
performs exactly one transition: an atomic command/assignment, a compound
entry (foreach/theonly/cases/script call), or a compound exit.  Iteration
bookkeeping (moving a foreach to its next goal) happens silently between
transitions.

Variables are goal-local; goals created by branching inherit a copy of the
parent goal's environment.  Command names resolve through a handler
registry, the extension point for domain-specific commands.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .calculus import (
    ProofTree,
    RULE_REGISTRY,
    StrategyResult,
    apply_rule,
    auto_strategy,
    instantiate as calculus_instantiate,
    try_close,
)
from .fol import (
    FormulaPosition,
    LogicError,
    Problem,
    Term,
    Var,
    is_formula,
    is_term,
    parse_formula,
    parse_term,
    render_formula,
    render_term,
)
from .patterns import (
    Binding,
    SequentPattern,
    match_sequent,
    parse_sequent_pattern,
    render_sequent_pattern,
)
from .script import (
    Assignment,
    Binary,
    Block,
    BoolLit,
    Cases,
    CommandCall,
    Expr,
    Foreach,
    IntLit,
    Script,
    ScriptCall,
    ScriptFile,
    Statement,
    StatementId,
    StringLit,
    TermLit,
    TheOnly,
    Unary,
    VarRef,
)


class InterpError(LogicError):
    code = "InterpError"


class NoSelectedGoal(InterpError):
    code = "NoSelectedGoal"


class MultipleGoalsNoSelector(InterpError):
    code = "MultipleGoalsNoSelector"

    def __init__(self, count: int):
        super().__init__(f"theonly needs exactly one open goal, found {count}")
        self.count = count


class UnknownCommand(InterpError):
    code = "UnknownCommand"


class UnknownScript(InterpError):
    code = "UnknownScript"


class MissingParameter(InterpError):
    code = "MissingParameter"


class UndefinedVariable(InterpError):
    code = "UndefinedVariable"


class EvalTypeError(InterpError):
    code = "TypeError"


class ConfigError(InterpError):
    code = "ConfigError"


class HandlerError(InterpError):
    code = "HandlerError"


class NoMatch(InterpError):
    code = "NoMatch"


class AmbiguousMatch(InterpError):
    code = "AmbiguousMatch"


class AlreadyFinished(InterpError):
    code = "AlreadyFinished"


# ---------------------------------------------------------------------------
# Values

Value = object  # int | bool | str | Term | Formula | SequentPattern


def value_kind(v: Value) -> str:
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, int):
        return "int"
    if isinstance(v, str):
        return "string"
    if isinstance(v, SequentPattern):
        return "pattern"
    if is_term(v):
        return "term"
    if is_formula(v):
        return "formula"
    raise EvalTypeError(f"not a script value: {v!r}")


def render_value(v: Value) -> str:
    kind = value_kind(v)
    if kind == "bool":
        return "true" if v else "false"
    if kind == "int":
        return str(v)
    if kind == "string":
        return v
    if kind == "term":
        return render_term(v)
    if kind == "formula":
        return render_formula(v)
    return render_sequent_pattern(v)


# ---------------------------------------------------------------------------
# Goals, frames, configuration

@dataclass
class Goal:
    node_id: int
    env: dict[str, Value]

    def __init__(self, node_id: int, env: dict[str, Value] | None = None):
        self.node_id = node_id
        self.env = env if env is not None else {}


@dataclass
class BlockFrame:
    block: Block
    index: int = 0

    def exhausted(self) -> bool:
        return self.index >= len(self.block.statements)


@dataclass
class ForeachFrame:
    stmt: Foreach
    worklist: list[int]
    pos: int = -1  # advanced before each iteration


@dataclass
class CasesFrame:
    stmt: Cases
    # (goal id, branch index or -1 for default, canonical binding items)
    plan: list[tuple[int, int, tuple]]
    pos: int = -1


@dataclass
class TheOnlyFrame:
    stmt: TheOnly


@dataclass
class CallFrame:
    stmt: ScriptCall
    callee: str


Frame = BlockFrame | ForeachFrame | CasesFrame | TheOnlyFrame | CallFrame

DEFAULT_CONFIG = {"prover.maxSteps": 1000, "prover.instLimit": 2}


@dataclass
class Transition:
    """What one executeStatement call did, for tracing."""

    kind: str  # "atomic" | "compoundEnter" | "compoundExit" | "strategy"
    stmt: Statement
    produced_subtree_root: int | None = None


def _block_key(block: Block) -> str:
    stmts = block.statements
    return stmts[0].sid.render() if stmts else "empty"


# ---------------------------------------------------------------------------
# State

class ProofScriptState:
    def __init__(self, problem: Problem, file: ScriptFile, entry: str | None = None):
        entry_name = entry if entry is not None else file.entry().name
        try:
            script = file.script(entry_name)
        except LogicError:
            raise UnknownScript(f"no script named '{entry_name}'") from None
        if script.parameters:
            raise MissingParameter(
                f"entry script '{entry_name}' has parameters "
                f"{list(script.parameters)}; none can be supplied at start"
            )
        self.problem = problem
        self.file = file
        self.entry_name = entry_name
        self.registry: dict[str, CommandHandler] = default_registry()
        self.tree = ProofTree(problem.root_sequent(), problem.signature.clone())
        self.goals: dict[int, Goal] = {self.tree.root_id: Goal(self.tree.root_id)}
        self.selected: int | None = self.tree.root_id
        self.config: dict[str, int] = dict(DEFAULT_CONFIG)
        self.frames: list[Frame] = [BlockFrame(script.body)]
        self.finished = False
        self._normalize()

    # -- structural helpers -------------------------------------------------

    def open_goal_ids(self) -> list[int]:
        return sorted(self.goals)

    def goal(self, node_id: int) -> Goal:
        return self.goals[node_id]

    def selected_goal(self) -> Goal | None:
        return self.goals.get(self.selected) if self.selected is not None else None

    def depth(self) -> int:
        return len(self.frames)

    def boundary(self) -> tuple[str, Statement] | None:
        """("stmt", s): s executes next; ("exit", c): compound c is about to
        be left; None: the run is over."""
        if self.finished:
            return None
        top = self.frames[-1]
        assert isinstance(top, BlockFrame)
        if not top.exhausted():
            return ("stmt", top.block.statements[top.index])
        controller = self.frames[-2]
        return ("exit", controller.stmt)

    @property
    def pc(self) -> StatementId | None:
        b = self.boundary()
        return None if b is None else b[1].sid

    def current_line(self) -> int:
        b = self.boundary()
        if b is None:
            return 0
        kind, stmt = b
        return stmt.span.start_line if kind == "stmt" else stmt.span.end_line

    # -- normalization ------------------------------------------------------

    def _normalize(self):
        """Advance iteration bookkeeping until the machine rests at a
        statement boundary, an exit boundary, or the end of the run."""
        while True:
            top = self.frames[-1]
            assert isinstance(top, BlockFrame)
            if not top.exhausted():
                return
            below = self.frames[-2] if len(self.frames) >= 2 else None
            if below is None:
                # entry script body done; the root frame stays so that frame
                # depth never drops below 1
                self.finished = True
                if self.selected not in self.goals:
                    self.selected = None
                return
            elif isinstance(below, ForeachFrame):
                if not self._advance_foreach(below, top):
                    return  # exit boundary
            elif isinstance(below, CasesFrame):
                if not self._advance_cases(below, top):
                    return  # exit boundary
            else:
                return  # theonly/call body done: exit boundary

    def _advance_foreach(self, fr: ForeachFrame, body: BlockFrame) -> bool:
        while fr.pos + 1 < len(fr.worklist):
            fr.pos += 1
            nid = fr.worklist[fr.pos]
            if nid in self.goals:  # entries closed meanwhile are skipped
                self.selected = nid
                body.index = 0
                return True
        return False

    def _advance_cases(self, fr: CasesFrame, body: BlockFrame) -> bool:
        while fr.pos + 1 < len(fr.plan):
            fr.pos += 1
            nid, branch_idx, binding_items = fr.plan[fr.pos]
            if nid not in self.goals:
                continue
            goal = self.goals[nid]
            for name, (_, value) in binding_items:
                goal.env[name] = value
            self.selected = nid
            body.block = (
                fr.stmt.branches[branch_idx].body
                if branch_idx >= 0
                else fr.stmt.default
            )
            body.index = 0
            return True
        return False

    def _sync_goals(self, inherited_env: dict[str, Value]):
        """Reconcile goals with the tree's open leaves after a command;
        fresh leaves inherit a copy of the acted-on goal's environment."""
        open_ids = set(self.tree.open_leaves())
        for dead in [g for g in self.goals if g not in open_ids]:
            del self.goals[dead]
        for nid in sorted(open_ids - self.goals.keys()):
            self.goals[nid] = Goal(nid, dict(inherited_env))
        if self.selected not in self.goals:
            self.selected = None

    # -- digesting and cloning ----------------------------------------------

    def canonical_doc(self) -> str:
        lines = [self.tree.canonical_doc()]
        for nid in self.open_goal_ids():
            g = self.goals[nid]
            env = ", ".join(
                f"{k}:{value_kind(v)}={render_value(v)}"
                for k, v in sorted(g.env.items())
            )
            lines.append(f"goal {nid} env[{env}]")
        lines.append(f"selected={self.selected}")
        lines.append(f"config={sorted(self.config.items())}")
        frames = []
        for fr in self.frames:
            if isinstance(fr, BlockFrame):
                frames.append(f"block@{_block_key(fr.block)}#{fr.index}")
            elif isinstance(fr, ForeachFrame):
                frames.append(
                    f"foreach@{fr.stmt.sid.render()} wl={fr.worklist} pos={fr.pos}"
                )
            elif isinstance(fr, CasesFrame):
                plan = [
                    (nid, bi, [f"{k}={render_value(v)}" for k, (_, v) in items])
                    for nid, bi, items in fr.plan
                ]
                frames.append(f"cases@{fr.stmt.sid.render()} plan={plan} pos={fr.pos}")
            elif isinstance(fr, TheOnlyFrame):
                frames.append(f"theonly@{fr.stmt.sid.render()}")
            elif isinstance(fr, CallFrame):
                frames.append(f"call@{fr.stmt.sid.render()}->{fr.callee}")
        lines.append("frames=" + " | ".join(frames))
        b = self.boundary()
        lines.append(
            "boundary=" + ("finished" if b is None else f"{b[0]}@{b[1].sid.render()}")
        )
        return "\n".join(lines)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_doc().encode()).hexdigest()

    def clone(self) -> "ProofScriptState":
        st = ProofScriptState.__new__(ProofScriptState)
        st.problem = self.problem
        st.file = self.file
        st.entry_name = self.entry_name
        st.registry = self.registry
        st.tree = self.tree.clone()
        st.goals = {nid: Goal(nid, dict(g.env)) for nid, g in self.goals.items()}
        st.selected = self.selected
        st.config = dict(self.config)
        st.frames = []
        for fr in self.frames:
            if isinstance(fr, BlockFrame):
                st.frames.append(BlockFrame(fr.block, fr.index))
            elif isinstance(fr, ForeachFrame):
                st.frames.append(ForeachFrame(fr.stmt, list(fr.worklist), fr.pos))
            elif isinstance(fr, CasesFrame):
                st.frames.append(CasesFrame(fr.stmt, list(fr.plan), fr.pos))
            elif isinstance(fr, TheOnlyFrame):
                st.frames.append(TheOnlyFrame(fr.stmt))
            else:
                st.frames.append(CallFrame(fr.stmt, fr.callee))
        st.finished = self.finished
        return st


# ---------------------------------------------------------------------------
# Expression evaluation

def eval_expr(e: Expr, env: dict[str, Value], state: ProofScriptState) -> Value:
    match e:
        case IntLit(v):
            return v
        case BoolLit(v):
            return v
        case StringLit(v):
            return v
        case TermLit(text):
            return parse_backtick(text, state)
        case VarRef(name):
            if name in env:
                return env[name]
            if name == "openGoals":
                return len(state.goals)
            if name == "currentLine":
                return state.current_line()
            if name in state.config:
                return state.config[name]
            raise UndefinedVariable(f"variable '{name}' is not defined")
        case Unary(op, operand):
            v = eval_expr(operand, env, state)
            if op == "!":
                if value_kind(v) != "bool":
                    raise EvalTypeError("'!' needs a boolean")
                return not v
            if value_kind(v) != "int":
                raise EvalTypeError("unary '-' needs an integer")
            return -v
        case Binary(op, left, right):
            return _eval_binary(op, left, right, env, state)
    raise EvalTypeError(f"cannot evaluate {e!r}")


def _eval_binary(op, left, right, env, state) -> Value:
    lv = eval_expr(left, env, state)
    if op in ("&&", "||"):
        if value_kind(lv) != "bool":
            raise EvalTypeError(f"'{op}' needs boolean operands")
        if op == "&&" and not lv:
            return False
        if op == "||" and lv:
            return True
        rv = eval_expr(right, env, state)
        if value_kind(rv) != "bool":
            raise EvalTypeError(f"'{op}' needs boolean operands")
        return rv
    rv = eval_expr(right, env, state)
    lk, rk = value_kind(lv), value_kind(rv)
    if op in ("==", "!="):
        if lk != rk:
            raise EvalTypeError(f"'{op}' compares values of one kind, got {lk} and {rk}")
        return (lv == rv) if op == "==" else (lv != rv)
    if lk != "int" or rk != "int":
        raise EvalTypeError(f"'{op}' needs integer operands")
    if op == "<":
        return lv < rv
    if op == "<=":
        return lv <= rv
    if op == ">":
        return lv > rv
    if op == ">=":
        return lv >= rv
    if op == "+":
        return lv + rv
    return lv - rv


def parse_backtick(text: str, state: ProofScriptState) -> Value:
    """Backtick payloads: a sequent pattern when `==>` appears, otherwise a
    term when it parses as one, otherwise a formula."""
    if "==>" in text:
        return parse_sequent_pattern(text)
    sig = state.tree.signature
    try:
        return parse_term(text, sig)
    except LogicError:
        pass
    return parse_formula(text, sig)


def eval_command_arg(e: Expr, env: dict[str, Value], state: ProofScriptState) -> Value:
    """Command arguments treat a bare unbound identifier as a plain string,
    so `instantiate var=X ...` works whether or not X is an env variable."""
    if isinstance(e, VarRef) and e.name not in env:
        if e.name not in state.config and e.name not in ("openGoals", "currentLine"):
            return e.name
    return eval_expr(e, env, state)


# ---------------------------------------------------------------------------
# Command handlers (the registry is the extension point)

@dataclass(frozen=True)
class CommandHandler:
    name: str
    required_args: tuple[str, ...]
    apply: object  # (state, goal, args: dict[str, Value]) -> HandlerResult


@dataclass
class HandlerResult:
    produced: list[int]
    subtree_root: int | None = None
    is_strategy: bool = False


def _env_prebinding(env: dict[str, Value]) -> Binding:
    out: Binding = {}
    for name, v in env.items():
        kind = value_kind(v)
        if kind in ("term", "formula"):
            out[name] = (kind, v)
    return out


def _position_from_args(
    state: ProofScriptState, goal: Goal, args: dict[str, Value]
) -> FormulaPosition | None:
    if "occ" in args:
        v = args["occ"]
        if value_kind(v) != "string":
            raise EvalTypeError('occ= needs a string like "succ:0"')
        return FormulaPosition.parse(v)
    if "on" in args:
        pat = args["on"]
        if value_kind(pat) != "pattern":
            raise EvalTypeError("on= needs a sequent pattern literal")
        if len(pat.ante) + len(pat.succ) != 1:
            raise HandlerError("on= pattern must contain exactly one formula pattern")
        seq = state.tree.node(goal.node_id).sequent
        res = match_sequent(pat, seq, _env_prebinding(goal.env))
        positions: list[FormulaPosition] = []
        for m in res.matches:
            for _, fp in m.positions():
                if fp not in positions:
                    positions.append(fp)
        if not positions:
            raise NoMatch(f"on= pattern matches nothing in goal {goal.node_id}")
        if len(positions) > 1:
            raise AmbiguousMatch(
                f"on= pattern matches {len(positions)} occurrences; pick one with occ="
            )
        return positions[0]
    return None


def _want_term(args: dict[str, Value], key: str) -> Term:
    v = args.get(key)
    if v is None:
        raise HandlerError(f"missing {key}=")
    if value_kind(v) == "term":
        return v
    raise EvalTypeError(f"{key}= needs a term, got {value_kind(v)}")


def _rule_handler(rule: str) -> CommandHandler:
    def apply(state: ProofScriptState, goal: Goal, args: dict[str, Value]) -> HandlerResult:
        position = _position_from_args(state, goal, args)
        rule_args: dict[str, object] = {}
        if rule in ("allLeft", "exRight"):
            rule_args["with"] = _want_term(args, "with")
        if rule == "cut":
            v = args.get("formula")
            if v is None:
                raise HandlerError("cut needs formula=")
            if value_kind(v) != "formula":
                raise EvalTypeError("formula= needs a formula")
            rule_args["formula"] = v
        if rule == "applyEq":
            v = args.get("eq")
            if v is None or value_kind(v) != "int":
                raise EvalTypeError("applyEq needs eq= (an antecedent index)")
            rule_args["eq"] = v
        produced = apply_rule(state.tree, goal.node_id, rule, position, rule_args)
        return HandlerResult(produced=list(produced))

    return CommandHandler(rule, RULE_REGISTRY[rule], apply)


def _auto_handler() -> CommandHandler:
    def apply(state: ProofScriptState, goal: Goal, args: dict[str, Value]) -> HandlerResult:
        res: StrategyResult = auto_strategy(
            state.tree,
            goal.node_id,
            state.config["prover.maxSteps"],
            state.config["prover.instLimit"],
        )
        return HandlerResult(
            produced=res.open_leaves, subtree_root=goal.node_id, is_strategy=True
        )

    return CommandHandler("auto", (), apply)


def _tryclose_handler() -> CommandHandler:
    def apply(state: ProofScriptState, goal: Goal, args: dict[str, Value]) -> HandlerResult:
        try_close(
            state.tree,
            goal.node_id,
            state.config["prover.maxSteps"],
            state.config["prover.instLimit"],
        )
        return HandlerResult(produced=[], subtree_root=goal.node_id, is_strategy=True)

    return CommandHandler("tryclose", (), apply)


def _instantiate_handler() -> CommandHandler:
    def apply(state: ProofScriptState, goal: Goal, args: dict[str, Value]) -> HandlerResult:
        v = args.get("var")
        if v is None:
            raise HandlerError("instantiate needs var=")
        kind = value_kind(v)
        if kind == "term" and isinstance(v, Var):
            var_name = v.name
        elif kind == "string":
            var_name = v
        else:
            raise EvalTypeError(
                f"var= needs a variable name or a bound variable, got {kind}"
            )
        witness = _want_term(args, "with")
        child = calculus_instantiate(state.tree, goal.node_id, var_name, witness)
        return HandlerResult(produced=[child])

    return CommandHandler("instantiate", ("var", "with"), apply)


def default_registry() -> dict[str, CommandHandler]:
    registry: dict[str, CommandHandler] = {}
    for rule in RULE_REGISTRY:
        if rule != "instantiate":
            registry[rule] = _rule_handler(rule)
    registry["auto"] = _auto_handler()
    registry["tryclose"] = _tryclose_handler()
    registry["instantiate"] = _instantiate_handler()
    return registry


# ---------------------------------------------------------------------------
# The step function

def init_state(problem: Problem, file: ScriptFile, entry: str | None = None) -> ProofScriptState:
    return ProofScriptState(problem, file, entry)


def _require_selection(state: ProofScriptState) -> Goal:
    if state.selected is not None and state.selected in state.goals:
        return state.goals[state.selected]
    if len(state.goals) == 1:
        (only,) = state.goals.values()
        state.selected = only.node_id
        return only
    raise NoSelectedGoal(f"{len(state.goals)} goals are open and none is selected")


def execute_statement(state: ProofScriptState) -> Transition:
    """Perform exactly one statement-boundary transition; mutates state."""
    b = state.boundary()
    if b is None:
        raise AlreadyFinished("script already ran to completion")
    kind, stmt = b
    if kind == "exit":
        return _exit_compound(state, stmt)
    top = state.frames[-1]

    if isinstance(stmt, CommandCall):
        tr = _exec_command(state, stmt)
        top.index += 1
        state._normalize()
        return tr
    if isinstance(stmt, Assignment):
        _exec_assignment(state, stmt)
        top.index += 1
        state._normalize()
        return Transition("atomic", stmt)
    if isinstance(stmt, Foreach):
        top.index += 1
        state.frames.append(ForeachFrame(stmt, state.open_goal_ids()))
        state.frames.append(_spent_block(stmt.body))
        state._normalize()
        return Transition("compoundEnter", stmt)
    if isinstance(stmt, TheOnly):
        if len(state.goals) != 1:
            raise MultipleGoalsNoSelector(len(state.goals))
        top.index += 1
        (only,) = state.goals
        state.selected = only
        state.frames.append(TheOnlyFrame(stmt))
        state.frames.append(BlockFrame(stmt.body))
        state._normalize()
        return Transition("compoundEnter", stmt)
    if isinstance(stmt, Cases):
        top.index += 1
        plan = _cases_plan(state, stmt)
        state.frames.append(CasesFrame(stmt, plan))
        state.frames.append(_spent_block(stmt.branches[0].body))
        state._normalize()
        return Transition("compoundEnter", stmt)
    if isinstance(stmt, ScriptCall):
        _enter_script_call(state, stmt)
        top.index += 1
        state._normalize()
        return Transition("compoundEnter", stmt)
    raise InterpError(f"cannot execute {type(stmt).__name__}")


def _spent_block(block: Block) -> BlockFrame:
    """A body frame already at its end, so normalization starts the first
    iteration (or exits straight away when there is none)."""
    return BlockFrame(block, len(block.statements))


def _exit_compound(state: ProofScriptState, stmt: Statement) -> Transition:
    state.frames.pop()  # the exhausted body frame
    controller = state.frames.pop()
    if isinstance(controller, (ForeachFrame, CasesFrame)):
        state.selected = None
    state._normalize()
    return Transition("compoundExit", stmt)


def _exec_command(state: ProofScriptState, stmt: CommandCall) -> Transition:
    goal = _require_selection(state)
    handler = state.registry.get(stmt.name)
    if handler is None:
        raise UnknownCommand(f"no handler for command '{stmt.name}'")
    args: dict[str, Value] = {}
    for name, expr in stmt.args:
        args[name] = eval_command_arg(expr, goal.env, state)
    env_snapshot = dict(goal.env)
    try:
        result: HandlerResult = handler.apply(state, goal, args)
    except LogicError:
        raise
    except Exception as e:  # registry extensions may raise anything
        raise HandlerError(f"command '{stmt.name}' failed: {e}") from e
    state._sync_goals(env_snapshot)
    if state.selected is None:
        produced_open = [n for n in sorted(result.produced) if n in state.goals]
        if produced_open:
            state.selected = produced_open[0]
    return Transition(
        "strategy" if result.is_strategy else "atomic",
        stmt,
        produced_subtree_root=result.subtree_root,
    )


def _exec_assignment(state: ProofScriptState, stmt: Assignment):
    if stmt.var_name.startswith("prover."):
        goal = state.selected_goal()
        value = eval_expr(stmt.value, goal.env if goal else {}, state)
        if stmt.var_name not in DEFAULT_CONFIG:
            raise ConfigError(f"unknown prover variable '{stmt.var_name}'")
        if value_kind(value) != "int" or value < 0:
            raise ConfigError(f"{stmt.var_name} needs a non-negative integer")
        state.config[stmt.var_name] = value
        return
    goal = _require_selection(state)
    goal.env[stmt.var_name] = eval_expr(stmt.value, goal.env, state)


def _cases_plan(state: ProofScriptState, stmt: Cases) -> list[tuple[int, int, tuple]]:
    """Each open goal gets at most one branch: the first whose pattern has a
    match, else the default when present, else the goal is left untouched."""
    plan: list[tuple[int, int, tuple]] = []
    for nid in state.open_goal_ids():
        goal = state.goals[nid]
        seq = state.tree.node(nid).sequent
        entry = None
        for bi, branch in enumerate(stmt.branches):
            res = match_sequent(branch.pattern, seq, _env_prebinding(goal.env))
            if res.matches:
                entry = (nid, bi, tuple(res.canonical.binding))
                break
        if entry is None and stmt.default is not None:
            entry = (nid, -1, ())
        if entry is not None:
            plan.append(entry)
    return plan


def _enter_script_call(state: ProofScriptState, stmt: ScriptCall):
    try:
        callee: Script = state.file.script(stmt.name)
    except LogicError:
        raise UnknownScript(f"call to undefined script '{stmt.name}'") from None
    goal = _require_selection(state)
    supplied: dict[str, Value] = {}
    for name, expr in stmt.args:
        if name not in callee.parameters:
            raise HandlerError(f"script '{stmt.name}' has no parameter '{name}'")
        supplied[name] = eval_expr(expr, goal.env, state)
    missing = [p for p in callee.parameters if p not in supplied]
    if missing:
        raise MissingParameter(f"script '{stmt.name}' needs {missing[0]}=")
    goal.env.update(supplied)
    state.frames.append(CallFrame(stmt, callee.name))
    state.frames.append(BlockFrame(callee.body))


def run_to_end(state: ProofScriptState, max_transitions: int = 100000) -> ProofScriptState:
    count = 0
    while not state.finished:
        execute_statement(state)
        count += 1
        if count > max_transitions:
            raise InterpError("script did not terminate within the transition limit")
    return state
