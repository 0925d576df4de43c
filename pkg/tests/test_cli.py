"""Command-line behavior: exit-code mapping, batch run output, trace export
determinism, the match lab, the REPL as a thin adapter over the debugger,
and server setup."""

import io
import json
import socket
from importlib import resources
from pathlib import Path

import pytest

from psdbg.cli import build_parser, cmd_serve, main, repl, serve_setup
from psdbg.debugger import DebugSession
from psdbg.fol import parse_problem
from psdbg.script import parse_script

PQ = "pred p/0; pred q/0; conjecture p & q -> q & p;\n"
PQ_SCRIPT = "script main() {\n  impRight;\n  andLeft;\n}\n"


def example(name: str) -> str:
    return resources.files("psdbg").joinpath(f"examples/{name}").read_text()


@pytest.fixture
def files(tmp_path):
    """Bundled examples plus the small p-and-q pair, on disk."""
    paths = {}
    for name in ("and.sqp", "and.kps", "split.sqp", "split.kps"):
        p = tmp_path / name
        p.write_text(example(name))
        paths[name] = str(p)
    pq = tmp_path / "pq.sqp"
    pq.write_text(PQ)
    paths["pq.sqp"] = str(pq)
    pqs = tmp_path / "pq.kps"
    pqs.write_text(PQ_SCRIPT)
    paths["pq.kps"] = str(pqs)
    paths["dir"] = tmp_path
    return paths


# -- check -------------------------------------------------------------------

def test_check_bundled_script_passes(files, capsys):
    assert main(["check", files["split.kps"]]) == 0
    assert "0 error(s)" in capsys.readouterr().out


def test_check_syntax_error_reports_position(files, capsys):
    bad = files["dir"] / "bad.kps"
    bad.write_text("script main() {\n  foreach { ;\n}\n")
    assert main(["check", str(bad)]) == 2
    err = capsys.readouterr().err
    assert f"{bad}:2:" in err


def test_check_missing_file(capsys):
    assert main(["check", "/nonexistent/x.kps"]) == 3


def test_check_against_problem_signature(files, capsys):
    script = files["dir"] / "lit.kps"
    script.write_text("script main() { instantiate var=X with=`nosuch`; }\n")
    assert main(["check", str(script), "--problem", files["and.sqp"]]) == 0
    assert "warning" in capsys.readouterr().out


# -- run ---------------------------------------------------------------------

def test_run_closes_bundled_examples(files, capsys):
    assert main(["run", files["and.sqp"], files["and.kps"]]) == 0
    assert "proof closed" in capsys.readouterr().out
    assert main(["run", files["split.sqp"], files["split.kps"]]) == 0
    assert "proof closed" in capsys.readouterr().out


def test_run_open_goals_prints_sequents(files, capsys):
    script = files["dir"] / "half.kps"
    script.write_text("script main() { impRight; }\n")
    assert main(["run", files["pq.sqp"], str(script)]) == 1
    out = capsys.readouterr().out
    assert "1 open goal(s)" in out
    assert "p & q ==> q & p" in out


def test_run_unknown_command_is_exit_2_with_span(files, capsys):
    script = files["dir"] / "broken.kps"
    script.write_text("script main() {\n  impRight;\n  frobnicate;\n}\n")
    assert main(["run", files["pq.sqp"], str(script)]) == 2
    err = capsys.readouterr().err
    assert f"{script}:3:3" in err
    assert "UnknownCommand" in err


def test_run_max_steps_override(files, capsys):
    assert main(["run", files["and.sqp"], files["and.kps"],
                 "--max-steps", "0"]) == 1


def test_run_trace_files_are_deterministic(files, capsys):
    for prob, script in (("and.sqp", "and.kps"), ("split.sqp", "split.kps")):
        t1 = files["dir"] / f"{prob}.t1.json"
        t2 = files["dir"] / f"{prob}.t2.json"
        assert main(["run", files[prob], files[script], "--trace", str(t1)]) == 0
        out1 = capsys.readouterr().out
        assert main(["run", files[prob], files[script], "--trace", str(t2)]) == 0
        out2 = capsys.readouterr().out
        assert out1 == out2  # same digest line
        assert t1.read_bytes() == t2.read_bytes()
        rows = json.loads(t1.read_text())
        assert rows and rows[-1]["openGoalsAfter"] == 0


# -- match -------------------------------------------------------------------

def test_match_on_conjecture(files, capsys):
    assert main(["match", files["and.sqp"], "--pattern", "==> ?F -> _"]) == 0
    out = capsys.readouterr().out
    assert "1 match(es)" in out
    assert "?F := p & q  (formula)" in out
    assert "succ:0" in out


def test_match_explicit_sequent(files, capsys):
    assert main(["match", files["and.sqp"],
                 "--pattern", "==> q & _",
                 "--sequent", "p, q ==> q & p"]) == 0
    out = capsys.readouterr().out
    assert "1 match(es) on p, q ==> q & p" in out


def test_match_zero_matches_is_success(files, capsys):
    assert main(["match", files["and.sqp"], "--pattern", "==> _ | _"]) == 0
    assert "0 match(es)" in capsys.readouterr().out


def test_match_bad_pattern(files, capsys):
    assert main(["match", files["and.sqp"], "--pattern", "==> (("]) == 2


# -- usage -------------------------------------------------------------------

def test_usage_errors_exit_3(capsys):
    assert main([]) == 3
    assert main(["frobnicate"]) == 3
    assert main(["run"]) == 3  # missing positionals
    assert main(["--help"]) == 0


# -- REPL --------------------------------------------------------------------

def run_repl(session, path, text: str) -> str:
    out = io.StringIO()
    repl(session, path, io.StringIO(text), out)
    return out.getvalue()


def split_session():
    return DebugSession(
        parse_problem(example("split.sqp")), parse_script(example("split.kps"))
    )


def test_repl_verbs_are_thin_adapters():
    driven = split_session()
    mirror = split_session()
    pairs = [
        ("s\n", mirror.step_over),
        ("si\n", mirror.step_into),
        ("si\n", mirror.step_into),
        ("rb\n", mirror.step_back),
        ("rbi\n", mirror.step_into_reverse),
        ("c\n", mirror.continue_run),
    ]
    for text, direct in pairs:
        run_repl(driven, "unused.kps", text)
        direct()
        assert driven.state.digest() == mirror.state.digest()
        assert driven.cursor == mirror.cursor


def test_repl_step_then_back_restores_digest():
    session = split_session()
    d0 = session.state.digest()
    out = run_repl(session, "x.kps", "s\nrb\nq\n")
    assert session.state.digest() == d0
    assert "[paused]" in out


def test_repl_breakpoint_continue(capsys):
    session = split_session()
    out = run_repl(session, "x.kps", "b 7\nc\n")
    assert "breakpoint 1 at line 7" in out
    assert session.state.boundary()[1].span.covers_line(7)
    assert not session.state.finished


def test_repl_unknown_verb_prints_help_without_state_change():
    session = split_session()
    d0 = session.state.digest()
    out = run_repl(session, "x.kps", "wat\n")
    assert "commands:" in out
    assert session.state.digest() == d0
    assert len(session.trace) == 0


def test_repl_goals_and_vars():
    session = split_session()
    out = run_repl(session, "x.kps", "s\ns\ns\ngoals\nvars\ntree\n")
    assert "==> sel(" in out or "partitioned" in out
    assert "prover.maxSteps = 2" in out


def test_repl_reverse_at_start_reports_error():
    session = split_session()
    out = run_repl(session, "x.kps", "rb\n")
    assert "error[AtStartOfTrace]" in out


def test_repl_apply_and_save_extends_script_file(files):
    session = DebugSession(
        parse_problem(PQ), parse_script(PQ_SCRIPT)
    )
    path = files["dir"] / "session.kps"
    path.write_text(PQ_SCRIPT)
    before = path.read_text()
    out = run_repl(
        session,
        str(path),
        "c\napply andRight\napply closeAxiom\napply closeAxiom\nsave\nq\n",
    )
    assert "applied andRight; new goals" in out
    assert "applied closeAxiom; goal closed" in out
    after = path.read_text()
    assert after.startswith(before.rstrip()[: before.rstrip().rfind("\n")])
    assert "cases {" in after
    assert session.state.tree.node(0).closed
    # the saved script closes the proof from scratch
    assert main(["run", files["pq.sqp"], str(path)]) == 0


def test_repl_apply_with_instantiation():
    src = "const c; pred r/1; assume r(c); conjecture \\exists V. r(V);\n"
    session = DebugSession(parse_problem(src), parse_script("script main() { }"))
    out = run_repl(
        session,
        "x.kps",
        "apply instantiate var=V with=`c`\napply closeAxiom\n",
    )
    assert "applied instantiate; new goals" in out
    assert "applied closeAxiom; goal closed" in out
    assert session.state.tree.node(0).closed


# -- serve -------------------------------------------------------------------

def serve_args(**over):
    parser = build_parser()
    argv = ["serve"]
    for key, value in over.items():
        argv += [f"--{key}", str(value)]
    return parser.parse_args(argv)


def test_serve_setup_preloads_session(files, capsys):
    args = serve_args(problem=files["and.sqp"], script=files["and.kps"])
    setup = serve_setup(args)
    assert not isinstance(setup, int)
    service, app = setup
    assert "s1" in service.sessions
    assert "preloaded session s1" in capsys.readouterr().out


def test_serve_setup_rejects_bad_problem(files, capsys):
    bad = files["dir"] / "bad.sqp"
    bad.write_text("pred p/0; conjecture p &&& p;")
    args = serve_args(problem=str(bad), script=files["and.kps"])
    assert serve_setup(args) == 2


def test_serve_setup_missing_file_and_lone_flag(files):
    args = serve_args(problem="/nonexistent.sqp", script=files["and.kps"])
    assert serve_setup(args) == 3
    parser = build_parser()
    args = parser.parse_args(["serve", "--problem", files["and.sqp"]])
    assert serve_setup(args) == 3


def test_serve_busy_port_exits_3(capsys):
    blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    blocker.bind(("127.0.0.1", 0))
    blocker.listen(1)
    port = blocker.getsockname()[1]
    try:
        args = serve_args(host="127.0.0.1", port=port)
        assert cmd_serve(args) == 3
    finally:
        blocker.close()


def test_default_port_env_override(monkeypatch):
    monkeypatch.setenv("PSDBG_PORT", "7999")
    args = build_parser().parse_args(["serve"])
    assert args.port == 7999
    monkeypatch.delenv("PSDBG_PORT")
    args = build_parser().parse_args(["serve"])
    assert args.port == 7317
