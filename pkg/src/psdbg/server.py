"""JSON wire protocol for driving debug sessions remotely.

One bidirectional text-frame connection carries requests {id, method,
params}, responses {id, ok, result|error}, and events {event, sessionId,
payload}.  State-changing methods emit a `stateChanged` event, fanned out
to every connection subscribed to the session; events raised by a request
are delivered after its response.  Sequents are rendered server-side with
per-node character spans so clients never reimplement the printer.
"""

from __future__ import annotations

import asyncio
import json
import threading
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .calculus import applicable_rules, apply_rule
from .debugger import Breakpoint, DebugSession, span_json
from .fol import (
    App,
    Atom,
    Const,
    Eq,
    Exists,
    Falsity,
    Forall,
    FormulaPosition,
    Implies,
    LogicError,
    Not,
    Or,
    Sequent,
    Truth,
    Var,
    _PREC,
    And,
    parse_formula,
    parse_problem,
    parse_term,
    render_formula,
    render_term,
)
from .interp import _env_prebinding, render_value
from .patterns import match_sequent, parse_sequent_pattern
from .script import parse_script

PROTOCOL_VERSION = 1
DEFAULT_PORT = 7317


class ProtocolError(LogicError):
    code = "BadRequest"


class UnknownMethod(ProtocolError):
    code = "UnknownMethod"


class UnknownSession(ProtocolError):
    code = "UnknownSession"


# ---------------------------------------------------------------------------
# Position-annotated rendering

def render_formula_spans(f, side: str, index: int):
    """Render one sequent formula exactly like render_formula, also
    returning a span for every subformula and subterm, addressed by
    FormulaPosition strings.  Spans include the node's own grouping
    parentheses when the context forces them."""
    out: list[str] = []
    spans: list[dict] = []
    n = 0

    def emit(s: str):
        nonlocal n
        out.append(s)
        n += len(s)

    def record(path: tuple[int, ...], start: int):
        spans.append(
            {
                "position": FormulaPosition(side, index, path).render(),
                "start": start,
                "end": n,
            }
        )

    def term(t, path):
        start = n
        match t:
            case Var(name) | Const(name):
                emit(name)
            case App(fn, args):
                emit(fn + "(")
                for i, a in enumerate(args):
                    if i:
                        emit(", ")
                    term(a, path + (i,))
                emit(")")
        record(path, start)

    def go(g, parent_prec: int, path):
        start = n
        match g:
            case Truth():
                emit("true")
            case Falsity():
                emit("false")
            case Atom(p, args):
                if not args:
                    emit(p)
                else:
                    emit(p + "(")
                    for i, a in enumerate(args):
                        if i:
                            emit(", ")
                        term(a, path + (i,))
                    emit(")")
            case Eq(l, r):
                term(l, path + (0,))
                emit(" = ")
                term(r, path + (1,))
            case Not(b):
                emit("!")
                go(b, _PREC[Not], path + (0,))
            case And(l, r):
                wrap = parent_prec > _PREC[And]
                if wrap:
                    emit("(")
                go(l, _PREC[And], path + (0,))
                emit(" & ")
                go(r, _PREC[And] + 1, path + (1,))
                if wrap:
                    emit(")")
            case Or(l, r):
                wrap = parent_prec > _PREC[Or]
                if wrap:
                    emit("(")
                go(l, _PREC[Or], path + (0,))
                emit(" | ")
                go(r, _PREC[Or] + 1, path + (1,))
                if wrap:
                    emit(")")
            case Implies(l, r):
                wrap = parent_prec > _PREC[Implies]
                if wrap:
                    emit("(")
                go(l, _PREC[Implies] + 1, path + (0,))
                emit(" -> ")
                go(r, _PREC[Implies], path + (1,))
                if wrap:
                    emit(")")
            case Forall(v, b):
                wrap = parent_prec != 0
                if wrap:
                    emit("(")
                emit(f"\\forall {v}. ")
                go(b, 0, path + (0,))
                if wrap:
                    emit(")")
            case Exists(v, b):
                wrap = parent_prec != 0
                if wrap:
                    emit("(")
                emit(f"\\exists {v}. ")
                go(b, 0, path + (0,))
                if wrap:
                    emit(")")
        record(path, start)

    go(f, 0, ())
    return "".join(out), spans


def render_sequent_sides(seq: Sequent) -> dict:
    def side(name: str, formulas) -> list[dict]:
        rows = []
        for i, f in enumerate(formulas):
            text, spans = render_formula_spans(f, name, i)
            rows.append({"index": i, "text": text, "spans": spans})
        return rows

    return {
        "text": seq.render(),
        "ante": side("ante", seq.ante),
        "succ": side("succ", seq.succ),
    }


# ---------------------------------------------------------------------------
# The transport-free service

class DebugService:
    """Method dispatch plus session/subscription bookkeeping.  Transports
    call handle_request and deliver the returned event frames."""

    def __init__(self):
        self.sessions: dict[str, DebugSession] = {}
        self.problem_texts: dict[str, str] = {}
        self._locks: dict[str, threading.RLock] = {}
        self._subscribers: dict[str, set[int]] = {}
        self._callbacks: dict[int, object] = {}
        self._next_session = 1
        self._next_conn = 1
        self._methods = {
            "session.create": self._m_create,
            "session.attach": self._m_attach,
            "session.list": self._m_list,
            "session.step": self._m_step,
            "session.continue": self._m_continue,
            "session.breakpoints.set": self._m_bp_set,
            "session.breakpoints.remove": self._m_bp_remove,
            "session.breakpoints.list": self._m_bp_list,
            "state.goals": self._m_goals,
            "state.goal": self._m_goal,
            "state.prooftree": self._m_prooftree,
            "state.script": self._m_script,
            "state.trace": self._m_trace,
            "interactive.rules": self._m_rules,
            "interactive.apply": self._m_apply,
            "interactive.finish": self._m_finish,
            "match.eval": self._m_match_eval,
        }

    # -- connections ---------------------------------------------------------

    def register(self, callback) -> int:
        conn_id = self._next_conn
        self._next_conn += 1
        self._callbacks[conn_id] = callback
        return conn_id

    def unregister(self, conn_id: int):
        self._callbacks.pop(conn_id, None)
        for subs in self._subscribers.values():
            subs.discard(conn_id)

    def fanout(self, events: list[dict]):
        for frame in events:
            for conn_id in sorted(self._subscribers.get(frame["sessionId"], ())):
                cb = self._callbacks.get(conn_id)
                if cb is not None:
                    cb(frame)

    # -- dispatch ------------------------------------------------------------

    def handle_request(self, conn_id: int, req: dict) -> tuple[dict, list[dict]]:
        req_id = req.get("id")
        events: list[dict] = []
        try:
            method = req.get("method")
            handler = self._methods.get(method)
            if handler is None:
                raise UnknownMethod(f"unknown method '{method}'")
            params = req.get("params") or {}
            if not isinstance(params, dict):
                raise ProtocolError("params must be an object")
            result = handler(conn_id, params, events)
            return {"id": req_id, "ok": True, "result": result}, events
        except LogicError as e:
            error = {"code": e.code, "message": str(e)}
            for attr in ("line", "col"):
                if getattr(e, attr, None) is not None:
                    error[attr] = getattr(e, attr)
            return {"id": req_id, "ok": False, "error": error}, []

    def _session(self, params: dict) -> tuple[str, DebugSession]:
        sid = params.get("sessionId")
        if sid not in self.sessions:
            raise UnknownSession(f"no session '{sid}'")
        return sid, self.sessions[sid]

    def _param(self, params: dict, key: str):
        if key not in params:
            raise ProtocolError(f"missing parameter '{key}'")
        return params[key]

    # -- shared renderings ---------------------------------------------------

    def summary(self, sid: str) -> dict:
        sess = self.sessions[sid]
        state = sess.state
        boundary = state.boundary()
        pc = None
        if boundary is not None:
            kind, stmt = boundary
            pc = {
                "span": span_json(stmt.span),
                "boundary": kind,
                "stmtId": stmt.sid.render() if stmt.sid else None,
            }
        return {
            "sessionId": sid,
            "mode": sess.mode,
            "pc": pc,
            "currentLine": state.current_line(),
            "goals": self._goal_rows(sess),
            "traceLength": len(sess.trace),
            "digest": state.digest(),
            "breakpoints": [bp.to_json() for bp in sess.list_breakpoints()],
            "finished": state.finished,
            "lastError": sess.last_error,
            "warning": sess.warning,
        }

    def _goal_rows(self, sess: DebugSession) -> list[dict]:
        rows = []
        for nid in sess.state.open_goal_ids():
            node = sess.state.tree.node(nid)
            rows.append(
                {
                    "nodeId": nid,
                    "branchLabel": node.branch_label,
                    "sequent": node.sequent.render(),
                    "selected": nid == sess.state.selected,
                }
            )
        return rows

    def _emit(self, sid: str, events: list[dict]):
        events.append(
            {"event": "stateChanged", "sessionId": sid, "payload": self.summary(sid)}
        )

    # -- session lifecycle ---------------------------------------------------

    def create_session(self, problem_text: str, script_text: str,
                       entry: str | None = None) -> str:
        problem = parse_problem(problem_text)
        file = parse_script(script_text)
        sess = DebugSession(problem, file, entry)
        sid = f"s{self._next_session}"
        self._next_session += 1
        self.sessions[sid] = sess
        self.problem_texts[sid] = problem_text
        self._locks[sid] = threading.RLock()
        self._subscribers[sid] = set()
        return sid

    def _m_create(self, conn_id, params, events):
        sid = self.create_session(
            self._param(params, "problemText"),
            self._param(params, "scriptText"),
            params.get("entry"),
        )
        self._subscribers[sid].add(conn_id)
        return {
            "protocolVersion": PROTOCOL_VERSION,
            **self.summary(sid),
            "scriptText": self.sessions[sid].file.source_text,
            "problemText": self.problem_texts[sid],
        }

    def _m_attach(self, conn_id, params, events):
        sid, sess = self._session(params)
        self._subscribers[sid].add(conn_id)
        return {
            "protocolVersion": PROTOCOL_VERSION,
            **self.summary(sid),
            "scriptText": sess.file.source_text,
            "problemText": self.problem_texts[sid],
        }

    def _m_list(self, conn_id, params, events):
        return {
            "sessions": [
                {
                    "sessionId": sid,
                    "mode": sess.mode,
                    "traceLength": len(sess.trace),
                    "openGoals": len(sess.state.goals),
                }
                for sid, sess in sorted(self.sessions.items())
            ]
        }

    # -- stepping ------------------------------------------------------------

    _STEP_KINDS = {
        "over": "step_over",
        "into": "step_into",
        "backOver": "step_back",
        "backInto": "step_into_reverse",
    }

    def _m_step(self, conn_id, params, events):
        sid, sess = self._session(params)
        kind = self._param(params, "kind")
        if kind not in self._STEP_KINDS:
            raise ProtocolError(f"unknown step kind '{kind}'")
        with self._locks[sid]:
            getattr(sess, self._STEP_KINDS[kind])()
        self._emit(sid, events)
        return self.summary(sid)

    def _m_continue(self, conn_id, params, events):
        sid, sess = self._session(params)
        with self._locks[sid]:
            sess.continue_run()
        self._emit(sid, events)
        return self.summary(sid)

    # -- breakpoints ---------------------------------------------------------

    def _m_bp_set(self, conn_id, params, events):
        sid, sess = self._session(params)
        with self._locks[sid]:
            bp = sess.set_breakpoint(
                int(self._param(params, "line")),
                params.get("condition"),
                bool(params.get("enabled", True)),
            )
        self._emit(sid, events)
        return bp.to_json()

    def _m_bp_remove(self, conn_id, params, events):
        sid, sess = self._session(params)
        with self._locks[sid]:
            sess.remove_breakpoint(int(self._param(params, "id")))
        self._emit(sid, events)
        return {"removed": int(params["id"])}

    def _m_bp_list(self, conn_id, params, events):
        _, sess = self._session(params)
        return {"breakpoints": [bp.to_json() for bp in sess.list_breakpoints()]}

    # -- state queries -------------------------------------------------------

    def _m_goals(self, conn_id, params, events):
        sid, sess = self._session(params)
        return {"goals": self._goal_rows(sess)}

    def _goal_by_index(self, sess: DebugSession, index: int) -> int:
        ids = sess.state.open_goal_ids()
        if not 0 <= index < len(ids):
            raise ProtocolError(f"goal index {index} outside 0..{len(ids) - 1}")
        return ids[index]

    def _m_goal(self, conn_id, params, events):
        sid, sess = self._session(params)
        nid = self._goal_by_index(sess, int(self._param(params, "index")))
        node = sess.state.tree.node(nid)
        env = sess.state.goals[nid].env
        return {
            "nodeId": nid,
            "branchLabel": node.branch_label,
            "sequent": render_sequent_sides(node.sequent),
            "env": {k: render_value(v) for k, v in sorted(env.items())},
        }

    def _m_prooftree(self, conn_id, params, events):
        sid, sess = self._session(params)
        tree = sess.state.tree
        nodes = []
        for nid in sorted(tree.nodes):
            n = tree.node(nid)
            nodes.append(
                {
                    "id": n.id,
                    "parent": n.parent,
                    "children": list(n.children),
                    "rule": n.rule.render() if n.rule else None,
                    "branchLabel": n.branch_label,
                    "closed": n.closed,
                    "sequent": n.sequent.render(),
                }
            )
        return {"root": 0, "nodes": nodes}

    def _m_script(self, conn_id, params, events):
        sid, sess = self._session(params)
        s = self.summary(sid)
        return {
            "source": sess.file.source_text,
            "entry": sess.state.entry_name,
            "pc": s["pc"],
            "currentLine": s["currentLine"],
        }

    def _m_trace(self, conn_id, params, events):
        sid, sess = self._session(params)
        return {"entries": sess.export_trace(), "cursor": sess.cursor}

    # -- interactive ---------------------------------------------------------

    def _m_rules(self, conn_id, params, events):
        sid, sess = self._session(params)
        goal = int(self._param(params, "goal"))
        if goal not in sess.state.goals:
            raise ProtocolError(f"node {goal} is not an open goal")
        pos = params.get("position")
        position = FormulaPosition.parse(pos) if pos else None
        rules = applicable_rules(sess.state.tree, goal, position)
        return {
            "rules": [
                {"rule": name, "requires": list(req)} for name, req in rules
            ]
        }

    def _parse_arguments(self, sess: DebugSession, raw: dict) -> dict:
        sig = sess.state.tree.signature
        args = {}
        for key, value in raw.items():
            if key in ("with", "formula", "term") and isinstance(value, str):
                try:
                    args[key] = parse_term(value, sig)
                except LogicError:
                    args[key] = parse_formula(value, sig)
            else:
                args[key] = value
        return args

    def _m_apply(self, conn_id, params, events):
        sid, sess = self._session(params)
        goal = int(self._param(params, "goal"))
        rule = self._param(params, "rule")
        pos = params.get("position")
        position = FormulaPosition.parse(pos) if pos else None
        args = self._parse_arguments(sess, params.get("arguments") or {})
        with self._locks[sid]:
            if sess.mode != "interactive" or sess.interactive_goal() != goal:
                sess.start_interactive(goal)
            produced = sess.apply_interactive(rule, position, args)
        self._emit(sid, events)
        return {
            "produced": produced,
            "interactiveGoal": sess.interactive_goal(),
            **self.summary(sid),
        }

    def _m_finish(self, conn_id, params, events):
        sid, sess = self._session(params)
        with self._locks[sid]:
            appended = sess.finish_interactive()
        self._emit(sid, events)
        return {
            "appended": appended,
            "scriptText": sess.file.source_text,
            **self.summary(sid),
        }

    # -- match lab -----------------------------------------------------------

    def _m_match_eval(self, conn_id, params, events):
        sid, sess = self._session(params)
        text = self._param(params, "pattern")
        pattern = parse_sequent_pattern(
            text if "==>" in text else "==> " + text
        )
        nid = self._goal_by_index(sess, int(self._param(params, "goalIndex")))
        seq = sess.state.tree.node(nid).sequent
        pre = _env_prebinding(sess.state.goals[nid].env)
        matches = match_sequent(pattern, seq, pre).matches
        rows = []
        for m in matches:
            bindings = {}
            for name, (kind, value) in m.binding:
                bindings[name] = {
                    "kind": kind,
                    "text": render_term(value) if kind == "term"
                    else render_formula(value),
                }
            rows.append(
                {
                    "bindings": bindings,
                    "anteAssignment": list(m.ante_assignment),
                    "succAssignment": list(m.succ_assignment),
                    "positions": [
                        p.render() for _, p in m.positions()
                    ],
                }
            )
        return {"count": len(rows), "matches": rows, "goalNodeId": nid}


# ---------------------------------------------------------------------------
# Websocket transport

def make_app(service: DebugService | None = None, static_dir: Path | None = None):
    app = FastAPI(title="psdbg debug server")
    svc = service if service is not None else DebugService()
    app.state.service = svc

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket):
        await websocket.accept()
        queue: asyncio.Queue = asyncio.Queue()
        conn_id = svc.register(queue.put_nowait)

        async def writer():
            while True:
                frame = await queue.get()
                await websocket.send_text(json.dumps(frame))

        writer_task = asyncio.create_task(writer())
        try:
            while True:
                raw = await websocket.receive_text()
                try:
                    req = json.loads(raw)
                except json.JSONDecodeError:
                    queue.put_nowait(
                        {
                            "id": None,
                            "ok": False,
                            "error": {
                                "code": "BadRequest",
                                "message": "frame is not valid JSON",
                            },
                        }
                    )
                    continue
                response, events = svc.handle_request(conn_id, req)
                queue.put_nowait(response)
                svc.fanout(events)
        except WebSocketDisconnect:
            pass
        finally:
            writer_task.cancel()
            svc.unregister(conn_id)

    @app.get("/healthz")
    async def healthz():
        return {"ok": True, "protocolVersion": PROTOCOL_VERSION}

    if static_dir is not None and static_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
