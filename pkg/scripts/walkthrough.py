"""End-to-end debugger walkthrough on the bundled branching example.

Drives the full loop in one run: load the branching problem and its
script, pause at a conditional breakpoint, travel backward and forward
through the trace, repair the remaining goals interactively, persist the
applied rules into the script, and replay the extended script from
scratch to show the digests agree.

    python3 scripts/walkthrough.py
"""

import sys
from importlib import resources

from psdbg.debugger import DebugSession
from psdbg.fol import parse_problem
from psdbg.script import parse_script

PROBLEM = """\
pred p/0; pred q/0; pred r/0;
assume r;
conjecture p | !p & r;
"""

SCRIPT = """\
script main() {
  orRight;
}
"""


def banner(text: str):
    print(f"\n== {text} " + "=" * max(0, 60 - len(text)))


def show(session: DebugSession):
    state = session.state
    print(f"mode={session.mode} cursor={session.cursor}/{len(session.trace)} "
          f"line={state.current_line()}")
    for nid in state.open_goal_ids():
        node = state.tree.node(nid)
        label = f" [{node.branch_label}]" if node.branch_label else ""
        sel = "*" if nid == state.selected else " "
        print(f"  {sel} goal {nid}{label}: {node.sequent.render()}")


def main() -> int:
    banner("bundled branching example, conditional breakpoint")
    problem = parse_problem(
        resources.files("psdbg").joinpath("examples/split.sqp").read_text()
    )
    file = parse_script(
        resources.files("psdbg").joinpath("examples/split.kps").read_text()
    )
    session = DebugSession(problem, file)
    bp = session.set_breakpoint(9, "openGoals >= 2")
    print(f"breakpoint {bp.id} at line {bp.line} when {bp.condition_text}")
    session.continue_run()
    show(session)

    banner("time travel: three steps back, then replay")
    for _ in range(3):
        session.step_into_reverse()
    show(session)
    for _ in range(3):
        session.step_into()
    show(session)

    banner("run to the end")
    session.continue_run()
    session.continue_run()
    show(session)
    print(f"root closed: {session.state.tree.node(0).closed}")
    print(f"digest: {session.state.digest()}")

    banner("interactive repair on a two-goal problem")
    session = DebugSession(parse_problem(PROBLEM), parse_script(SCRIPT))
    session.continue_run()
    show(session)
    goals = session.state.open_goal_ids()
    session.start_interactive(goals[0])
    print("applying andRight, then closing both branches by hand")
    session.apply_interactive("andRight")
    session.apply_interactive("notRight")
    session.apply_interactive("closeAxiom")
    session.start_interactive(session.state.open_goal_ids()[0])
    session.apply_interactive("closeAxiom")
    appended = session.finish_interactive()
    print("appended to the script:")
    for line in appended.splitlines():
        print(f"  {line}")

    banner("replay the extended script from scratch")
    replay = DebugSession(parse_problem(PROBLEM), session.file)
    replay.continue_run()
    show(replay)
    same = replay.state.digest() == session.state.digest()
    print(f"digest match after replay: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main())
