"""Command-line entry points: batch check/run, the terminal debugger REPL,
the match lab, and the long-running debug server.

Exit codes: 0 success or proof closed, 1 finished with open goals, 2 broken
script or problem (parse or runtime error), 3 usage error (bad flags,
missing file, busy port).
"""

from __future__ import annotations

import argparse
import json
import os
import socket
import sys
from pathlib import Path

from .debugger import DebugSession
from .fol import (
    FormulaPosition,
    LogicError,
    ParseError,
    Signature,
    parse_formula,
    parse_problem,
    parse_term,
    render_formula,
    render_term,
)
from .interp import default_registry, render_value
from .patterns import match_sequent, parse_sequent_pattern
from .script import parse_script, validate
from .server import DEFAULT_PORT, DebugService, make_app

EXIT_OK = 0
EXIT_OPEN_GOALS = 1
EXIT_BROKEN = 2
EXIT_USAGE = 3


def _fail(message: str, status: int) -> int:
    print(message, file=sys.stderr)
    return status


def _read_file(path: str) -> str | None:
    try:
        return Path(path).read_text()
    except OSError:
        return None


def _location(path: str, e: LogicError) -> str:
    line = getattr(e, "line", None)
    col = getattr(e, "col", None)
    if line is not None:
        return f"{path}:{line}:{col or 0}"
    return path


# ---------------------------------------------------------------------------
# check

def cmd_check(args) -> int:
    text = _read_file(args.script)
    if text is None:
        return _fail(f"cannot read {args.script}", EXIT_USAGE)
    try:
        file = parse_script(text)
    except ParseError as e:
        return _fail(f"{_location(args.script, e)}: error: {e}", EXIT_BROKEN)
    sig = Signature()
    if args.problem:
        ptext = _read_file(args.problem)
        if ptext is None:
            return _fail(f"cannot read {args.problem}", EXIT_USAGE)
        try:
            sig = parse_problem(ptext).signature
        except LogicError as e:
            return _fail(f"{_location(args.problem, e)}: error: {e}", EXIT_BROKEN)
    diags = validate(file, set(default_registry()), sig)
    for d in diags:
        print(f"{args.script}:{d.line}:{d.col}: {d.severity}: {d.message}")
    errors = sum(1 for d in diags if d.severity == "error")
    print(f"{len(file.scripts)} script(s), {errors} error(s), "
          f"{len(diags) - errors} warning(s)")
    return EXIT_BROKEN if errors else EXIT_OK


# ---------------------------------------------------------------------------
# run

def _load_session(problem_path: str, script_path: str,
                  entry: str | None) -> DebugSession | int:
    ptext = _read_file(problem_path)
    if ptext is None:
        return _fail(f"cannot read {problem_path}", EXIT_USAGE)
    stext = _read_file(script_path)
    if stext is None:
        return _fail(f"cannot read {script_path}", EXIT_USAGE)
    try:
        problem = parse_problem(ptext)
    except LogicError as e:
        return _fail(f"{_location(problem_path, e)}: error: {e}", EXIT_BROKEN)
    try:
        file = parse_script(stext)
        return DebugSession(problem, file, entry)
    except LogicError as e:
        return _fail(f"{_location(script_path, e)}: error: {e}", EXIT_BROKEN)


def cmd_run(args) -> int:
    session = _load_session(args.problem, args.script, args.entry)
    if isinstance(session, int):
        return session
    if args.max_steps is not None:
        session.state.config["prover.maxSteps"] = args.max_steps
    session.continue_run()
    if args.trace:
        Path(args.trace).write_text(
            json.dumps(session.export_trace(), indent=1, sort_keys=True) + "\n"
        )
    if session.last_error is not None:
        boundary = session.state.boundary()
        where = ""
        if boundary is not None:
            span = boundary[1].span
            where = f"{args.script}:{span.start_line}:{span.start_col}: "
        err = session.last_error
        return _fail(f"{where}error[{err['code']}]: {err['message']}", EXIT_BROKEN)
    state = session.state
    digest = state.digest()
    if state.tree.node(0).closed:
        print(f"proof closed; {len(session.trace)} transition(s); digest {digest}")
        return EXIT_OK
    goals = state.open_goal_ids()
    print(f"{len(goals)} open goal(s); digest {digest}")
    for nid in goals:
        node = state.tree.node(nid)
        label = f" [{node.branch_label}]" if node.branch_label else ""
        print(f"  goal {nid}{label}: {node.sequent.render()}")
    return EXIT_OPEN_GOALS


# ---------------------------------------------------------------------------
# match

def _split_top_level(text: str) -> list[str]:
    # split on commas outside parentheses
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def _parse_sequent(text: str, sig: Signature):
    from .fol import Sequent

    if "==>" not in text:
        raise ParseError("a sequent needs '==>'", 1, 1)
    left, right = text.split("==>", 1)
    ante = tuple(parse_formula(p, sig) for p in _split_top_level(left))
    succ = tuple(parse_formula(p, sig) for p in _split_top_level(right))
    return Sequent(ante, succ)


def cmd_match(args) -> int:
    ptext = _read_file(args.problem)
    if ptext is None:
        return _fail(f"cannot read {args.problem}", EXIT_USAGE)
    try:
        problem = parse_problem(ptext)
    except LogicError as e:
        return _fail(f"{_location(args.problem, e)}: error: {e}", EXIT_BROKEN)
    try:
        pattern = parse_sequent_pattern(
            args.pattern if "==>" in args.pattern else "==> " + args.pattern
        )
    except ParseError as e:
        return _fail(f"pattern: error: {e}", EXIT_BROKEN)
    try:
        seq = (
            _parse_sequent(args.sequent, problem.signature)
            if args.sequent
            else problem.root_sequent()
        )
    except LogicError as e:
        return _fail(f"sequent: error: {e}", EXIT_BROKEN)
    matches = match_sequent(pattern, seq).matches
    print(f"{len(matches)} match(es) on {seq.render()}")
    n_ante = len(pattern.ante)
    for k, m in enumerate(matches):
        print(f"match {k}:")
        for slot, pos in m.positions():
            side = seq.side(pos.side)
            kind = "ante" if slot < n_ante else "succ"
            print(f"  pattern {kind}[{slot if slot < n_ante else slot - n_ante}]"
                  f" -> {pos.render()}  {render_formula(side[pos.index])}")
        for name, (kind, value) in sorted(m.binding):
            text = render_term(value) if kind == "term" else render_formula(value)
            print(f"  ?{name} := {text}  ({kind})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# debug REPL

REPL_HELP = """commands:
  b <line> [cond]   set breakpoint (optional condition expression)
  d <id>            delete breakpoint
  s / si            step over / step into
  rb / rbi          step back / reverse step into
  c                 continue to breakpoint, error, or end
  goals             list open goals
  goal [n]          show goal n in full (and focus it for apply)
  tree              print the proof tree
  vars              show the selected goal's variables and config
  trace             print the recorded trace
  apply <rule> [k=v ...]   apply a rule to the focused goal (interactive)
  save              persist interactive steps into the script file
  q                 quit"""


def _state_line(session: DebugSession) -> str:
    state = session.state
    return (f"[{session.mode}] line {state.current_line()} | "
            f"{len(state.goals)} open goal(s) | "
            f"trace {session.cursor}/{len(session.trace)}")


def _parse_repl_value(session: DebugSession, key: str, raw: str):
    text = raw[1:-1] if raw.startswith("`") and raw.endswith("`") else raw
    sig = session.state.tree.signature
    if key == "occ":
        return FormulaPosition.parse(text)
    if key in ("with", "formula", "term"):
        try:
            return parse_term(text, sig)
        except LogicError:
            return parse_formula(text, sig)
    if key == "var":
        return text
    try:
        return int(text)
    except ValueError:
        return text


def _repl_apply(session: DebugSession, focus: int | None,
                tokens: list[str], out) -> int | None:
    if not tokens:
        print("apply needs a rule name", file=out)
        return focus
    rule, position, arguments = tokens[0], None, {}
    for tok in tokens[1:]:
        if "=" not in tok:
            print(f"bad argument '{tok}', expected key=value", file=out)
            return focus
        key, raw = tok.split("=", 1)
        value = _parse_repl_value(session, key, raw)
        if key == "occ":
            position = value
        else:
            arguments[key] = value
    state = session.state
    target = focus if focus in state.goals else None
    if target is None:
        target = session.interactive_goal()
    if target not in state.goals:
        target = state.selected
    if target not in state.goals and len(state.goals) == 1:
        target = next(iter(state.goals))
    if target not in state.goals:
        print("no open goal in focus; use `goal <n>` first", file=out)
        return focus
    if session.mode != "interactive" or session.interactive_goal() != target:
        session.start_interactive(target)
    produced = session.apply_interactive(rule, position, arguments)
    if produced:
        print(f"applied {rule}; new goals {produced}", file=out)
    else:
        print(f"applied {rule}; goal closed", file=out)
    return session.interactive_goal()


def _show_goal(session: DebugSession, nid: int, out):
    state = session.state
    node = state.tree.node(nid)
    label = f" [{node.branch_label}]" if node.branch_label else ""
    print(f"goal {nid}{label}: {node.sequent.render()}", file=out)
    env = state.goals[nid].env
    for k in sorted(env):
        print(f"  {k} = {render_value(env[k])}", file=out)


def repl(session: DebugSession, script_path: str, inp, out) -> int:
    print("psdbg interactive debugger; type anything unknown for help", file=out)
    print(_state_line(session), file=out)
    focus: int | None = None
    while True:
        out.write("psdbg> ")
        out.flush()
        raw = inp.readline()
        if not raw:
            break
        tokens = raw.split()
        if not tokens:
            continue
        verb, rest = tokens[0], tokens[1:]
        try:
            if verb == "q":
                break
            elif verb == "b" and rest:
                cond = " ".join(rest[1:]) or None
                bp = session.set_breakpoint(int(rest[0]), cond)
                tail = f" if {cond}" if cond else ""
                print(f"breakpoint {bp.id} at line {bp.line}{tail}", file=out)
            elif verb == "d" and rest:
                session.remove_breakpoint(int(rest[0]))
                print(f"removed breakpoint {rest[0]}", file=out)
            elif verb in ("s", "si", "rb", "rbi", "c"):
                {
                    "s": session.step_over,
                    "si": session.step_into,
                    "rb": session.step_back,
                    "rbi": session.step_into_reverse,
                    "c": session.continue_run,
                }[verb]()
                print(_state_line(session), file=out)
                if session.last_error:
                    e = session.last_error
                    print(f"error[{e['code']}]: {e['message']}", file=out)
                if session.warning:
                    print(f"warning: {session.warning}", file=out)
            elif verb == "goals":
                for nid in session.state.open_goal_ids():
                    node = session.state.tree.node(nid)
                    mark = "*" if nid == session.state.selected else " "
                    label = f" [{node.branch_label}]" if node.branch_label else ""
                    print(f"{mark} {nid}{label}: {node.sequent.render()}",
                          file=out)
            elif verb == "goal":
                if rest:
                    nid = int(rest[0])
                    if nid not in session.state.goals:
                        print(f"node {nid} is not an open goal", file=out)
                        continue
                    focus = nid
                else:
                    nid = focus if focus in session.state.goals else (
                        session.state.selected
                    )
                    if nid is None and len(session.state.goals) == 1:
                        nid = next(iter(session.state.goals))
                    if nid is None:
                        print("no goal in focus", file=out)
                        continue
                _show_goal(session, nid, out)
            elif verb == "tree":
                print(session.state.tree.canonical_doc(), file=out)
            elif verb == "vars":
                goal = session.state.selected_goal()
                if goal is not None:
                    for k in sorted(goal.env):
                        print(f"{k} = {render_value(goal.env[k])}", file=out)
                for k in sorted(session.state.config):
                    print(f"{k} = {session.state.config[k]}", file=out)
            elif verb == "trace":
                for row in session.export_trace():
                    done = "*" if row["index"] < session.cursor else " "
                    print(f"{done}[{row['index']:3}] {row['kind']:13} "
                          f"line {row['span']['startLine']:3} {row['stmtId']}",
                          file=out)
                print(f"cursor at {session.cursor}", file=out)
            elif verb == "apply":
                focus = _repl_apply(session, focus, rest, out)
            elif verb == "save":
                appended = session.finish_interactive()
                if appended:
                    Path(script_path).write_text(session.file.source_text)
                    print(f"appended to {script_path}:", file=out)
                    print(appended, file=out)
                else:
                    print("nothing recorded; script unchanged", file=out)
            else:
                print(REPL_HELP, file=out)
        except LogicError as e:
            print(f"error[{e.code}]: {e}", file=out)
    return EXIT_OK


def cmd_debug(args) -> int:
    session = _load_session(args.problem, args.script, args.entry)
    if isinstance(session, int):
        return session
    return repl(session, args.script, sys.stdin, sys.stdout)


# ---------------------------------------------------------------------------
# serve

def _static_dir() -> Path | None:
    env = os.environ.get("PSDBG_UI_DIR")
    if env:
        return Path(env)
    local = Path("frontend") / "dist"
    return local if local.is_dir() else None


def serve_setup(args) -> tuple[DebugService, object] | int:
    """Everything cmd_serve does short of binding the event loop."""
    service = DebugService()
    if bool(args.problem) != bool(args.script):
        return _fail("--problem and --script must be given together", EXIT_USAGE)
    if args.problem:
        ptext = _read_file(args.problem)
        if ptext is None:
            return _fail(f"cannot read {args.problem}", EXIT_USAGE)
        stext = _read_file(args.script)
        if stext is None:
            return _fail(f"cannot read {args.script}", EXIT_USAGE)
        try:
            sid = service.create_session(ptext, stext)
        except LogicError as e:
            return _fail(f"error: {e}", EXIT_BROKEN)
        print(f"preloaded session {sid}")
    app = make_app(service, _static_dir())
    return service, app


def cmd_serve(args) -> int:
    setup = serve_setup(args)
    if isinstance(setup, int):
        return setup
    _, app = setup
    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((args.host, args.port))
        probe.close()
    except OSError as e:
        return _fail(f"cannot bind {args.host}:{args.port}: {e}", EXIT_USAGE)
    import uvicorn

    print(f"psdbg debug server on ws://{args.host}:{args.port}/ws")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 3, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="psdbg",
        description="proof script debugger: check, run, debug, match, serve",
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("check", parents=[], help="parse and validate a script")
    p.add_argument("script")
    p.add_argument("--problem", help="check backtick literals against this problem")

    p = sub.add_parser("run", help="run a script to the end")
    p.add_argument("problem")
    p.add_argument("script")
    p.add_argument("--trace", help="write the trace as JSON to this file")
    p.add_argument("--entry", help="entry script name (default: first)")
    p.add_argument("--max-steps", type=int, help="override prover.maxSteps")

    p = sub.add_parser("debug", help="debug a script interactively")
    p.add_argument("problem")
    p.add_argument("script")
    p.add_argument("--entry")

    p = sub.add_parser("match", help="evaluate a sequent pattern")
    p.add_argument("problem")
    p.add_argument("--pattern", required=True)
    p.add_argument("--sequent", help="target sequent (default: the conjecture)")

    p = sub.add_parser("serve", help="start the debug server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument(
        "--port",
        type=int,
        default=int(os.environ.get("PSDBG_PORT", DEFAULT_PORT)),
    )
    p.add_argument("--problem")
    p.add_argument("--script")
    return parser


_COMMANDS = {
    "check": cmd_check,
    "run": cmd_run,
    "debug": cmd_debug,
    "match": cmd_match,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
