"""Execution control over script runs: step over/into and their reverse
variants, line breakpoints with optional conditions, an immutable snapshot
trace, and an interactive mode whose rule applications are persisted back
into the script as a generated cases block.

Reverse stepping restores earlier snapshots; the undone trace suffix is
kept for cheap redo until an interactive edit diverges from it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .calculus import apply_rule
from .fol import (
    FormulaPosition,
    LogicError,
    Problem,
    Sequent,
    is_formula,
    is_term,
    render_formula,
    render_term,
)
from .interp import (
    AlreadyFinished,
    ProofScriptState,
    Transition,
    eval_expr,
    execute_statement,
    init_state,
    value_kind,
)
from .patterns import (
    NoDistinguishingPattern,
    SequentPattern,
    formula_to_pattern,
    generate_case_pattern,
    render_sequent_pattern,
)
from .script import (
    Block,
    CaseBranch,
    Cases,
    CommandCall,
    Expr,
    IntLit,
    ScriptFile,
    Span,
    Statement,
    StringLit,
    TermLit,
    VarRef,
    parse_expression,
    parse_script,
    render_statement,
)


class DebuggerError(LogicError):
    code = "DebuggerError"


class AtStartOfTrace(DebuggerError):
    code = "AtStartOfTrace"


class InvalidLine(DebuggerError):
    code = "InvalidLine"


class DuplicateBreakpoint(DebuggerError):
    code = "DuplicateBreakpoint"


class UnknownBreakpoint(DebuggerError):
    code = "UnknownBreakpoint"


class IndexOutOfRange(DebuggerError):
    code = "IndexOutOfRange"


class InvalidGoal(DebuggerError):
    code = "InvalidGoal"


class NotInteractive(DebuggerError):
    code = "NotInteractive"


# ---------------------------------------------------------------------------
# Trace records

@dataclass(frozen=True)
class Snapshot:
    id: int
    state: ProofScriptState  # treated as an immutable value; never mutated
    digest: str


@dataclass(frozen=True)
class TraceEntry:
    index: int
    stmt_id: str
    span: Span
    snapshot_before: Snapshot
    snapshot_after: Snapshot
    kind: str  # atomic | compoundEnter | compoundExit | strategy
    produced_subtree_root: int | None = None

    def depth_before(self) -> int:
        return self.snapshot_before.state.depth()

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "stmtId": self.stmt_id,
            "span": span_json(self.span),
            "kind": self.kind,
            "digestBefore": self.snapshot_before.digest,
            "digestAfter": self.snapshot_after.digest,
            "openGoalsAfter": len(self.snapshot_after.state.goals),
        }


def span_json(span: Span) -> dict:
    return {
        "startLine": span.start_line,
        "startCol": span.start_col,
        "endLine": span.end_line,
        "endCol": span.end_col,
    }


@dataclass
class Breakpoint:
    id: int
    line: int
    condition: Expr | None
    condition_text: str | None
    enabled: bool = True

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "line": self.line,
            "condition": self.condition_text,
            "enabled": self.enabled,
        }


# ---------------------------------------------------------------------------
# The session

class DebugSession:
    def __init__(self, problem: Problem, file: ScriptFile, entry: str | None = None):
        self.problem = problem
        self.file = file
        self.state = init_state(problem, file, entry)
        self._snap_next = 0
        self.initial = self._snapshot()
        self.trace: list[TraceEntry] = []
        self.cursor = 0  # entries applied to reach the current state
        self.breakpoints: dict[int, Breakpoint] = {}
        self._bp_next = 1
        self.last_error: dict | None = None
        self.warning: str | None = None
        self.last_transition: TraceEntry | None = None
        self._interactive: dict | None = None

    # -- mode and snapshots --------------------------------------------------

    @property
    def mode(self) -> str:
        if self._interactive is not None:
            return "interactive"
        return "finished" if self.state.finished else "paused"

    def _snapshot(self) -> Snapshot:
        snap = Snapshot(self._snap_next, self.state.clone(), self.state.digest())
        self._snap_next += 1
        return snap

    def _before_snapshot(self) -> Snapshot:
        return self.trace[self.cursor - 1].snapshot_after if self.cursor else self.initial

    def state_at(self, index: int) -> Snapshot:
        if not 0 <= index < len(self.trace):
            raise IndexOutOfRange(
                f"trace index {index} outside 0..{len(self.trace) - 1}"
            )
        return self.trace[index].snapshot_after

    def export_trace(self) -> list[dict]:
        return [entry.to_json() for entry in self.trace]

    # -- single-transition advance ------------------------------------------

    def _advance_one(self) -> TraceEntry | None:
        """Apply one transition: replay a retained entry when rewound, else
        execute fresh.  Returns None when a runtime error paused the run."""
        if self.cursor < len(self.trace):
            entry = self.trace[self.cursor]
            self.state = entry.snapshot_after.state.clone()
            self.cursor += 1
            self.last_transition = entry
            return entry
        before = self._before_snapshot()
        try:
            tr: Transition = execute_statement(self.state)
        except LogicError as e:
            self.state = before.state.clone()
            self.last_error = {"code": e.code, "message": str(e)}
            return None
        after = self._snapshot()
        entry = TraceEntry(
            index=len(self.trace),
            stmt_id=tr.stmt.sid.render(),
            span=tr.stmt.span,
            snapshot_before=before,
            snapshot_after=after,
            kind=tr.kind,
            produced_subtree_root=tr.produced_subtree_root,
        )
        self.trace.append(entry)
        self.cursor += 1
        self.last_transition = entry
        return entry

    def _require_forward(self):
        if self._interactive is not None:
            raise NotInteractive("finish interactive mode before stepping")
        if self.state.finished:
            raise AlreadyFinished("script already ran to completion")
        self.last_error = None
        self.warning = None

    # -- stepping ------------------------------------------------------------

    def step_into(self) -> "DebugSession":
        """One transition: enters compounds, runs strategies to completion
        (exposing their subtree root), equals step_over for atomic rules."""
        self._require_forward()
        self._advance_one()
        return self

    def step_over(self) -> "DebugSession":
        """Run the statement at pc to completion, nested work included, and
        pause at the next boundary whose frame depth is back at the start's."""
        self._require_forward()
        depth = self.state.depth()
        if self._advance_one() is None:
            return self
        while not self.state.finished and self.state.depth() > depth:
            if self._advance_one() is None:
                break
        return self

    def step_back(self) -> "DebugSession":
        """Restore the before-snapshot of the last entry at the current frame
        depth or shallower: the inverse of step_over."""
        if self.cursor == 0:
            raise AtStartOfTrace("already at the start of the trace")
        depth = self.state.depth()
        j = self.cursor - 1
        while j > 0 and self.trace[j].depth_before() > depth:
            j -= 1
        self._restore(j)
        return self

    def step_into_reverse(self) -> "DebugSession":
        """Restore the before-snapshot of the last entry, whatever its depth."""
        if self.cursor == 0:
            raise AtStartOfTrace("already at the start of the trace")
        self._restore(self.cursor - 1)
        return self

    def _restore(self, index: int):
        self.state = self.trace[index].snapshot_before.state.clone()
        self.cursor = index
        self.last_error = None
        self.warning = None

    # -- breakpoints and continue -------------------------------------------

    def set_breakpoint(self, line: int, condition: str | None = None,
                       enabled: bool = True) -> Breakpoint:
        if not any(s.span.covers_line(line) for s in self.file.statements()):
            raise InvalidLine(f"no statement covers line {line}")
        for bp in self.breakpoints.values():
            if bp.line == line and bp.condition_text == condition:
                raise DuplicateBreakpoint(
                    f"breakpoint at line {line} with the same condition exists"
                )
        expr = parse_expression(condition) if condition is not None else None
        bp = Breakpoint(self._bp_next, line, expr, condition, enabled)
        self._bp_next += 1
        self.breakpoints[bp.id] = bp
        return bp

    def remove_breakpoint(self, bp_id: int):
        if bp_id not in self.breakpoints:
            raise UnknownBreakpoint(f"no breakpoint {bp_id}")
        del self.breakpoints[bp_id]

    def list_breakpoints(self) -> list[Breakpoint]:
        return [self.breakpoints[k] for k in sorted(self.breakpoints)]

    def _breakpoint_hit(self, stmt: Statement) -> bool:
        for bp in self.list_breakpoints():
            if not bp.enabled or not stmt.span.covers_line(bp.line):
                continue
            if bp.condition is None:
                return True
            goal = self.state.selected_goal()
            env = goal.env if goal is not None else {}
            try:
                v = eval_expr(bp.condition, env, self.state)
            except LogicError as e:
                self.warning = f"breakpoint {bp.id} condition failed: {e}"
                return True  # pause loudly instead of running past it
            if value_kind(v) != "bool":
                self.warning = (
                    f"breakpoint {bp.id} condition is {value_kind(v)}, not bool"
                )
                return True
            if v:
                return True
        return False

    def continue_run(self, max_transitions: int = 100000) -> "DebugSession":
        """Run until a breakpoint is about to execute, an error pauses the
        run, or the script finishes.  The statement at pc always executes
        first, so continuing from a breakpoint moves past it."""
        self._require_forward()
        first = True
        for _ in range(max_transitions):
            if self.state.finished:
                return self
            if not first:
                b = self.state.boundary()
                if b is not None and b[0] == "stmt" and self._breakpoint_hit(b[1]):
                    return self
            if self._advance_one() is None:
                return self
            first = False
        raise DebuggerError("continue did not settle within the transition limit")

    # -- interactive mode ----------------------------------------------------

    def start_interactive(self, goal_node_id: int) -> "DebugSession":
        if goal_node_id not in self.state.goals:
            raise InvalidGoal(f"node {goal_node_id} is not an open goal")
        if self._interactive is None:
            base = [
                (nid, self.state.tree.node(nid).sequent)
                for nid in self.state.open_goal_ids()
            ]
            self._interactive = {"base": base, "goal": goal_node_id, "recorded": []}
        else:
            self._interactive["goal"] = goal_node_id
        return self

    @property
    def recorded_interactive(self) -> list[tuple[int, CommandCall]]:
        return list(self._interactive["recorded"]) if self._interactive else []

    def interactive_goal(self) -> int | None:
        return self._interactive["goal"] if self._interactive else None

    def apply_interactive(
        self,
        rule_name: str,
        position: FormulaPosition | None = None,
        arguments: dict | None = None,
    ) -> list[int]:
        if self._interactive is None:
            raise NotInteractive("start interactive mode on a goal first")
        target = self._interactive["goal"]
        if target is None or target not in self.state.goals:
            raise InvalidGoal("the interactive goal is no longer open")
        env_snapshot = dict(self.state.goals[target].env)
        produced = apply_rule(
            self.state.tree, target, rule_name, position, arguments or {}
        )
        # a successful edit diverges from any retained redo suffix
        del self.trace[self.cursor:]
        self.state._sync_goals(env_snapshot)
        base_goal = self._base_of(target)
        cmd = _record_command(rule_name, position, arguments or {})
        self._interactive["recorded"].append((base_goal, cmd))
        open_children = [n for n in produced if n in self.state.goals]
        self._interactive["goal"] = open_children[0] if open_children else None
        return produced

    def _base_of(self, nid: int) -> int:
        base_ids = {g for g, _ in self._interactive["base"]}
        walk = nid
        while walk is not None:
            if walk in base_ids:
                return walk
            walk = self.state.tree.node(walk).parent
        raise InvalidGoal(f"node {nid} is outside the interactive base goals")

    def finish_interactive(self) -> str:
        """Convert the recorded rule applications into a cases block, append
        it to the script source, and rebuild the session over the extended
        script so the whole run stays replayable."""
        if self._interactive is None:
            raise NotInteractive("not in interactive mode")
        recorded = self._interactive["recorded"]
        base = self._interactive["base"]
        if not recorded:
            self._interactive = None
            return ""
        touched = sorted({g for g, _ in recorded})
        branches = []
        for gid in touched:
            target_seq = next(seq for nid, seq in base if nid == gid)
            siblings = [seq for nid, seq in base if nid != gid]
            pattern = _distinguishing_pattern(target_seq, siblings)
            body = Block([cmd for g, cmd in recorded if g == gid])
            branches.append(
                CaseBranch(render_sequent_pattern(pattern), pattern, body)
            )
        cases_stmt = Cases(branches, None)
        block_text = "\n".join(render_statement(cases_stmt, 1))
        new_src = _append_to_entry_body(
            self.file, self.state.entry_name, block_text
        )
        new_file = parse_script(new_src)
        rebuilt = DebugSession(self.problem, new_file, self.state.entry_name)
        while not rebuilt.state.finished:
            if rebuilt._advance_one() is None:
                raise DebuggerError(
                    "extended script fails to replay: "
                    + rebuilt.last_error["message"]
                )
        self.file = new_file
        self.state = rebuilt.state
        self.initial = rebuilt.initial
        self.trace = rebuilt.trace
        self.cursor = rebuilt.cursor
        self._snap_next = rebuilt._snap_next
        self.last_transition = rebuilt.last_transition
        self._interactive = None
        return block_text


def _record_command(
    rule_name: str, position: FormulaPosition | None, arguments: dict
) -> CommandCall:
    args: list[tuple[str, Expr]] = []
    if position is not None:
        args.append(("occ", StringLit(position.render())))
    for key, value in arguments.items():
        if key == "var":
            args.append((key, VarRef(str(value))))
        elif isinstance(value, int) and not isinstance(value, bool):
            args.append((key, IntLit(value)))
        elif is_term(value):
            args.append((key, TermLit(render_term(value))))
        elif is_formula(value):
            args.append((key, TermLit(render_formula(value))))
        else:
            args.append((key, StringLit(str(value))))
    return CommandCall(rule_name, tuple(args))


def _distinguishing_pattern(
    target: Sequent, siblings: list[Sequent]
) -> SequentPattern:
    try:
        return generate_case_pattern(target, siblings)
    except NoDistinguishingPattern:
        # fall back to the exact sequent with every formula listed
        return SequentPattern(
            tuple(formula_to_pattern(f) for f in target.ante),
            tuple(formula_to_pattern(f) for f in target.succ),
        )


def _append_to_entry_body(file: ScriptFile, entry: str, block_text: str) -> str:
    """Insert block_text just before the closing brace of the entry script's
    body, leaving the rest of the source untouched."""
    script = file.script(entry)
    line = script.body.span.end_line
    col = script.body.span.end_col - 1  # the brace itself
    src = file.source_text
    lines = src.split("\n")
    offset = sum(len(l) + 1 for l in lines[: line - 1]) + (col - 1)
    head = src[:offset].rstrip(" \t")
    if not head.endswith("\n"):
        head += "\n"
    return head + block_text + "\n" + src[offset:]
