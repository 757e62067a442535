"""HTTP/JSON session service over the stager, miner, and enumerator.

Sessions persist as append-only event logs (one file per session):
creation, each accepted utterance, and undo/redo markers.  Restoring a
session replays its log through the deterministic stager, so a restart
reproduces byte-identical API state.  A log that fails to replay
quarantines just that session (410); everything else stays healthy.
"""

from __future__ import annotations

import json
import secrets
import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response

from .core import DlgError, ParseError, parse_domains, parse_episodes, parse_spec, render_episode, render_spec
from .enumeration import enumerate_union
from .mining import mine
from .rewrite import residual_union
from .staging import (
    HistoryError,
    askable,
    compile_stager,
    redo,
    start_session,
    step,
    undo,
)

DEFAULT_ACTION = "complete"
SIZE_GUARD = 8  # stateless endpoints refuse larger question sets (422)


def _json(payload, status: int = 200) -> Response:
    body = json.dumps(payload, sort_keys=True) + "\n"
    return Response(content=body, status_code=status, media_type="application/json")


class ApiError(Exception):
    def __init__(self, status: int, payload: dict):
        super().__init__(payload.get("error", ""))
        self.status = status
        self.payload = payload


def _parse_or_400(parser, text, what: str):
    if not isinstance(text, str):
        raise ApiError(400, {"error": f"missing or non-string field: {what}", "position": None})
    try:
        return parser(text)
    except ParseError as exc:
        position = f"{exc.line}:{exc.col}" if exc.line is not None else None
        raise ApiError(400, {"error": str(exc), "position": position})
    except DlgError as exc:
        raise ApiError(400, {"error": str(exc), "position": None})


class _Session:
    def __init__(self, sid: str, spec_text: str, domains_text: str, action: str, state):
        self.id = sid
        self.spec_text = spec_text
        self.domains_text = domains_text
        self.action = action
        self.state = state
        self.lock = threading.Lock()


class SessionStore:
    def __init__(self, state_dir=None):
        self.dir = Path(state_dir) if state_dir else None
        self.sessions: dict = {}
        self.quarantined: set = set()
        self.lock = threading.Lock()
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)
            self._restore()

    # -- persistence ------------------------------------------------------

    def _log_path(self, sid: str) -> Path:
        return self.dir / f"{sid}.log"

    def append(self, sid: str, event: dict) -> None:
        if self.dir is None:
            return
        with open(self._log_path(sid), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    def _restore(self) -> None:
        for path in sorted(self.dir.glob("*.log")):
            sid = path.stem
            try:
                session = self._replay(sid, path)
            except Exception:
                self.quarantined.add(sid)
                continue
            self.sessions[sid] = session

    def _replay(self, sid: str, path: Path) -> _Session:
        lines = path.read_text(encoding="utf-8").splitlines()
        head = json.loads(lines[0])
        if head.get("event") != "created":
            raise ValueError("log does not start with a creation event")
        spec = parse_spec(head["spec"])
        domains = parse_domains(head["domains"])
        action = head.get("action", DEFAULT_ACTION)
        state = start_session(compile_stager(spec, domains, action=action))
        for line in lines[1:]:
            event = json.loads(line)
            kind = event["event"]
            if kind == "utterance":
                state, result = step(state, event["bindings"])
                if result.outcome == "rejected":
                    raise ValueError("logged utterance replays to a rejection")
            elif kind == "undo":
                state = undo(state)
            elif kind == "redo":
                state = redo(state)
            else:
                raise ValueError(f"unknown event kind: {kind}")
        return _Session(sid, head["spec"], head["domains"], action, state)

    # -- registry ---------------------------------------------------------

    def create(self, spec_text: str, domains_text: str, action: str) -> _Session:
        spec = _parse_or_400(parse_spec, spec_text, "spec")
        domains = _parse_or_400(parse_domains, domains_text, "domains")
        try:
            plan = compile_stager(spec, domains, action=action)
        except DlgError as exc:
            raise ApiError(400, {"error": str(exc), "position": None})
        sid = secrets.token_urlsafe(12)
        session = _Session(sid, spec_text, domains_text, action, start_session(plan))
        with self.lock:
            self.sessions[sid] = session
        self.append(
            sid,
            {"event": "created", "spec": spec_text, "domains": domains_text, "action": action},
        )
        return session

    def get(self, sid: str) -> _Session:
        if sid in self.quarantined:
            raise ApiError(410, {"error": "session log is corrupt"})
        with self.lock:
            session = self.sessions.get(sid)
        if session is None:
            raise ApiError(404, {"error": "unknown session"})
        return session


def _completion_payload(state):
    if not state.completed:
        return None
    return {
        "action": state.completion.action,
        "bindings": state.completion.bindings,
    }


def _state_payload(session: _Session) -> dict:
    state = session.state
    return {
        "askable": sorted(askable(state)),
        "history": state.history_bindings,
        "completed": state.completed,
        "completion": _completion_payload(state),
    }


async def _read_json(request: Request) -> dict:
    try:
        data = json.loads(await request.body())
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise ApiError(400, {"error": "malformed JSON"})
    if not isinstance(data, dict):
        raise ApiError(400, {"error": "expected a JSON object"})
    return data


def create_app(state_dir=None) -> FastAPI:
    app = FastAPI(title="dlgkit session service")
    # The browser console is served as static files, so it talks to this
    # API cross-origin.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = SessionStore(state_dir)
    app.state.store = store

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return _json(exc.payload, exc.status)

    @app.get("/v1/healthz")
    async def healthz():
        return _json({"status": "ok"})

    @app.post("/v1/sessions")
    async def create_session(request: Request):
        data = await _read_json(request)
        action = data.get("action", DEFAULT_ACTION)
        if not isinstance(action, str):
            raise ApiError(400, {"error": "action must be a string", "position": None})
        session = store.create(data.get("spec"), data.get("domains"), action)
        return _json(
            {"id": session.id, "askable": sorted(askable(session.state)), "history": []},
            status=201,
        )

    @app.get("/v1/sessions/{sid}")
    async def get_session(sid: str):
        session = store.get(sid)
        with session.lock:
            return _json(_state_payload(session))

    @app.post("/v1/sessions/{sid}/utterance")
    async def post_utterance(sid: str, request: Request):
        data = await _read_json(request)
        bindings = data.get("bindings")
        if (
            not isinstance(bindings, dict)
            or not bindings
            or not all(isinstance(k, str) and isinstance(v, str) for k, v in bindings.items())
        ):
            raise ApiError(400, {"error": "bindings must be a non-empty string map"})
        session = store.get(sid)
        with session.lock:
            if session.state.completed:
                raise ApiError(409, {"error": "session already completed"})
            new_state, result = step(session.state, bindings)
            if result.outcome == "rejected":
                return _json({"outcome": "rejected", "reason": result.reason})
            session.state = new_state
            store.append(sid, {"event": "utterance", "bindings": bindings})
            if result.outcome == "completed":
                return _json(
                    {
                        "outcome": "completed",
                        "askable": [],
                        "residual_spec": None,
                        "completion": _completion_payload(new_state),
                    }
                )
            residual = residual_union(new_state.plan.spec, new_state.history_keys)
            return _json(
                {
                    "outcome": "accepted",
                    "askable": sorted(askable(new_state)),
                    "residual_spec": render_spec(residual),
                }
            )

    def _history_op(sid: str, op, marker: str):
        session = store.get(sid)
        with session.lock:
            try:
                session.state = op(session.state)
            except HistoryError as exc:
                raise ApiError(409, {"error": str(exc)})
            store.append(sid, {"event": marker})
            return _json(_state_payload(session))

    @app.post("/v1/sessions/{sid}/undo")
    async def post_undo(sid: str):
        return _history_op(sid, undo, "undo")

    @app.post("/v1/sessions/{sid}/redo")
    async def post_redo(sid: str):
        return _history_op(sid, redo, "redo")

    @app.post("/v1/mine")
    async def post_mine(request: Request):
        data = await _read_json(request)
        spec = _parse_or_400(parse_episodes, data.get("episodes"), "episodes")
        if len(spec.questions) > SIZE_GUARD:
            raise ApiError(422, {"error": f"size guard: at most {SIZE_GUARD} questions"})
        result = mine(spec)
        return _json(
            {"spec_text": render_spec(result.union), "minimal": result.minimal_claimed}
        )

    @app.post("/v1/enumerate")
    async def post_enumerate(request: Request):
        data = await _read_json(request)
        union = _parse_or_400(parse_spec, data.get("spec_text"), "spec_text")
        if len(union.questions) > SIZE_GUARD:
            raise ApiError(422, {"error": f"size guard: at most {SIZE_GUARD} questions"})
        enum = enumerate_union(union)
        episodes = sorted(render_episode(ep) for ep in enum.episodes)
        return _json({"episodes": episodes, "count": len(episodes)})

    return app
