"""HTTP wire API for creating, inspecting, and playing sessions.

Runs on the standard library's threading HTTP server; bodies are JSON
both ways.  Endpoints:

* ``GET  /api/formulas`` - the bundled formula catalog.
* ``POST /api/sessions`` - create a session.  Body: ``{"formula":
  "<catalog name>"}`` or ``{"source": "<formula text>", "signature":
  ["pred P : ack", ...]}``, plus optional ``"human_role"``
  ("player" or "opponent", default player), ``"engine"`` ("greedy" or
  "scripted"), ``"limits"`` overrides, and ``"name"``.
* ``GET  /api/sessions/{id}`` - current board: U/V/A, turn, outcome.
* ``GET  /api/sessions/{id}/moves`` - legal moves for the side to move,
  each with a stable token, display fields, and a one-line wire
  annotation.
* ``POST /api/sessions/{id}/moves`` - submit a move by ``{"token": t}``
  or explicitly by ``{"formula": "<printed formula>", "values": [...]}``
  where each value is an integer, a constant name, or ``"fresh"``.
* ``POST /api/sessions/{id}/auto`` - the engine plays its role once.
* ``GET  /api/sessions/{id}/hint`` - search-recommended move for the
  side to move.
* ``GET  /api/sessions/{id}/transcript`` - full table, structured
  records with wire events, and the timeline text.

Errors: 404 unknown session or formula, 409 illegal or stale move (the
body carries the engine's rejection reason), 410 closed session, 400
malformed request.  Sessions persist through the store; every applied
move is logged before the response is sent.  Move tokens hash the
session id, the board version, and the move's canonical content, so a
token minted for an older board version can never replay against a
newer one.

Anything outside ``/api/`` serves files from the optional UI directory,
so a built front end can ride along on the same port.
"""

from __future__ import annotations

import hashlib
import json
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .corpus import catalog_json, get as corpus_get
from .formulas import FormulaError, IntLit, Sort
from .game import (
    GameState,
    IllegalMove,
    Move,
    Player,
    _move_order_key,
    legal_moves_opponent,
    legal_moves_player,
    resolve_move,
)
from .netsim import Annotator, EventKind, SessionTrace, scripted_sender
from .normal import normalize
from .solve import Greedy, SearchLimits
from .store import LiveSession, SessionStore, StoreError, _role_word
from .syntax import ParseError, parse_formula, parse_signature, print_formula


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _limits_from(payload: dict | None, base: SearchLimits = SearchLimits()) -> SearchLimits:
    if not payload:
        return base
    allowed = {"max_states", "max_depth", "int_bound", "fresh_bound"}
    bad = set(payload) - allowed
    if bad:
        raise ApiError(400, f"unknown limit fields: {', '.join(sorted(bad))}")
    merged = {
        "max_states": base.max_states,
        "max_depth": base.max_depth,
        "int_bound": base.int_bound,
        "fresh_bound": base.fresh_bound,
    }
    for k, v in payload.items():
        if not isinstance(v, int) or v < 0:
            raise ApiError(400, f"limit {k} must be a non-negative integer")
        merged[k] = v
    return SearchLimits(**merged)


def _board_json(session: LiveSession) -> dict:
    state = session.state
    outcome = session.transcript.outcome
    return {
        "id": session.id,
        "name": session.name,
        "version": session.version,
        "turn": _role_word(state.turn),
        "human_role": _role_word(session.human_role),
        "engine": session.engine,
        "engine_role": _role_word(session.engine_role),
        "u": [print_formula(nf.to_formula()) for nf in state.u],
        "v": [print_formula(nf.to_formula()) for nf in state.v],
        "a": [print_formula(x) for x in state.a],
        "fresh_count": state.fresh_count,
        "closed": session.closed,
        "outcome": {
            "kind": outcome.kind.value,
            "reason": outcome.reason,
            "steps": outcome.steps,
        },
        "limits": {
            "max_states": session.limits.max_states,
            "max_depth": session.limits.max_depth,
            "int_bound": session.limits.int_bound,
            "fresh_bound": session.limits.fresh_bound,
        },
        "created": session.created,
        "updated": session.updated,
    }


def _value_json(state: GameState, sort: Sort, value) -> dict:
    if isinstance(value, IntLit):
        return {"sort": "int", "value": value.value, "display": str(value.value)}
    name = value.name
    fresh = name.startswith("#") and name[1:].isdigit() and int(name[1:]) >= state.fresh_count
    return {
        "sort": "ack",
        "value": name,
        "display": "fresh" if fresh else name,
        "fresh": fresh,
    }


class SessionManager:
    """Store-backed live sessions plus per-session engines and locks."""

    def __init__(self, store: SessionStore):
        self.store = store
        self._live: dict[str, LiveSession] = {}
        self._engines: dict[tuple[str, str], object] = {}
        self._guard = threading.Lock()

    # -- lookup ------------------------------------------------------

    def get(self, session_id: str) -> LiveSession:
        with self._guard:
            session = self._live.get(session_id)
        if session is not None:
            return session
        try:
            session = self.store.load(session_id)
        except KeyError:
            raise ApiError(404, f"unknown session {session_id!r}")
        with self._guard:
            return self._live.setdefault(session_id, session)

    # -- creation ------------------------------------------------------

    def create(self, payload: dict) -> LiveSession:
        role_word = payload.get("human_role", "player")
        try:
            human_role = {"player": Player.PLAYER, "opponent": Player.OPPONENT}[role_word]
        except KeyError:
            raise ApiError(400, f"human_role must be 'player' or 'opponent', got {role_word!r}")
        engine = payload.get("engine", "greedy")
        if engine not in ("greedy", "scripted"):
            raise ApiError(400, f"engine must be 'greedy' or 'scripted', got {engine!r}")
        if "formula" in payload:
            name = payload["formula"]
            try:
                f, sig, entry = corpus_get(name)
            except FormulaError:
                raise ApiError(404, f"no bundled formula named {name!r}")
            limits = _limits_from(payload.get("limits"), entry.search_limits)
            root = normalize(f)
        elif "source" in payload:
            decls = payload.get("signature", [])
            if not isinstance(decls, list):
                raise ApiError(400, "signature must be a list of declaration lines")
            try:
                sig = parse_signature("\n".join(decls))
                root = normalize(parse_formula(payload["source"], sig))
            except (ParseError, FormulaError) as exc:
                raise ApiError(400, str(exc))
            name = payload.get("name", "custom")
            limits = _limits_from(payload.get("limits"))
        else:
            raise ApiError(400, "body needs 'formula' (catalog name) or 'source' (formula text)")
        try:
            session = self.store.create(
                name, sig, root, human_role=human_role, engine=engine, limits=limits
            )
        except (StoreError, FormulaError) as exc:
            raise ApiError(400, str(exc))
        with self._guard:
            self._live[session.id] = session
        return session

    # -- moves ---------------------------------------------------------

    def legal_moves(self, session: LiveSession) -> list[Move]:
        state = session.state
        if session.closed:
            return []
        policy = session.limits.policy()
        if state.turn is Player.OPPONENT:
            if not state.v:
                return []
            moves = legal_moves_opponent(state, policy)
        else:
            moves = legal_moves_player(state, policy)
        return sorted(moves, key=_move_order_key)

    def move_token(self, session: LiveSession, move: Move) -> str:
        basis = f"{session.id}:{session.version}:{_move_order_key(move)!r}"
        return hashlib.sha256(basis.encode()).hexdigest()[:16]

    def move_json(self, session: LiveSession, move: Move) -> dict:
        state = session.state
        event = session.annotator.classify(state.turn, move)
        return {
            "token": self.move_token(session, move),
            "formula": print_formula(move.formula.to_formula()),
            "values": [
                _value_json(state, sort, value)
                for (_, sort), value in zip(move.formula.prefix, move.values)
            ],
            "annotation": event.describe(),
            "kind": event.kind.value,
            "loses_immediately": event.kind is EventKind.OPPONENT_FORFEIT,
        }

    def _require_open(self, session: LiveSession) -> None:
        if session.closed:
            raise ApiError(410, "session is closed")

    def _apply_logged(self, session: LiveSession, move: Move) -> None:
        try:
            session.apply(move)
        except IllegalMove as exc:
            raise ApiError(409, f"illegal move: {exc}")
        except StoreError as exc:
            raise ApiError(410, str(exc))
        self.store.append_move(session, move)

    def submit(self, session_id: str, payload: dict) -> LiveSession:
        session = self.get(session_id)
        with self.store.lock(session_id):
            self._require_open(session)
            if "token" in payload:
                token = payload["token"]
                match = next(
                    (
                        m
                        for m in self.legal_moves(session)
                        if self.move_token(session, m) == token
                    ),
                    None,
                )
                if match is None:
                    raise ApiError(
                        409,
                        "token matches no currently legal move; "
                        "the board may have advanced since it was issued",
                    )
                self._apply_logged(session, match)
                return session
            if "formula" in payload:
                move = self._explicit_move(session, payload)
                self._apply_logged(session, move)
                return session
            raise ApiError(400, "body needs 'token' or 'formula' plus 'values'")

    def _explicit_move(self, session: LiveSession, payload: dict) -> Move:
        try:
            return resolve_move(
                session.state, payload["formula"], payload.get("values", [])
            )
        except IllegalMove as exc:
            raise ApiError(409, f"illegal move: {exc}")

    # -- engine steps ----------------------------------------------------

    def _greedy_for(self, session: LiveSession, side: Player):
        key = (session.id, "greedy", _role_word(side))
        with self._guard:
            engine = self._engines.get(key)
        if engine is None:
            engine = Greedy(side, session.limits)
            with self._guard:
                engine = self._engines.setdefault(key, engine)
        return engine

    def _engine_for(self, session: LiveSession, side: Player):
        if session.engine == "scripted" and side is Player.OPPONENT:
            key = (session.id, "scripted")
            with self._guard:
                engine = self._engines.get(key)
            if engine is None:
                engine = scripted_sender(
                    session.limits.policy(), session.signature, session.annotator
                )
                with self._guard:
                    engine = self._engines.setdefault(key, engine)
            return engine
        return self._greedy_for(session, side)

    def auto(self, session_id: str) -> LiveSession:
        session = self.get(session_id)
        with self.store.lock(session_id):
            self._require_open(session)
            state = session.state
            if state.turn is not session.engine_role:
                raise ApiError(409, "it is not the engine's turn")
            if state.turn is Player.OPPONENT and not state.v:
                raise ApiError(409, "no move to make: V is empty, the play is over")
            engine = self._engine_for(session, state.turn)
            try:
                move = engine.choose(state)
            except IllegalMove as exc:
                raise ApiError(409, f"engine cannot move: {exc}")
            self._apply_logged(session, move)
            return session

    def hint(self, session_id: str) -> dict:
        session = self.get(session_id)
        with self.store.lock(session_id):
            self._require_open(session)
            state = session.state
            if state.turn is Player.OPPONENT and not state.v:
                raise ApiError(409, "no hint: V is empty, the play is over")
            engine = self._greedy_for(session, state.turn)
            try:
                move = engine.choose(state)
            except IllegalMove as exc:
                raise ApiError(409, f"no hint available: {exc}")
            return self.move_json(session, move)

    def transcript(self, session_id: str) -> dict:
        session = self.get(session_id)
        trace = SessionTrace(session.transcript, list(session.events))
        return {
            "table": session.transcript.to_table(),
            "records": trace.to_records(),
            "timeline": trace.to_timeline(),
        }


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "lproto"

    # quiet by default; the serve command prints its own banner
    def log_message(self, fmt, *args):
        if getattr(self.server, "verbose", False):
            super().log_message(fmt, *args)

    @property
    def manager(self) -> SessionManager:
        return self.server.manager

    # -- plumbing ------------------------------------------------------

    def _send_json(self, status: int, payload) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self._cors()
        self.end_headers()
        self.wfile.write(body)

    def _cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length > 1_000_000:
            raise ApiError(400, "request body too large")
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        try:
            payload = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ApiError(400, f"bad JSON body: {exc}")
        if not isinstance(payload, dict):
            raise ApiError(400, "JSON body must be an object")
        return payload

    def _route(self, method: str) -> None:
        try:
            handled = self._dispatch(method)
        except ApiError as exc:
            self._send_json(exc.status, {"error": exc.message})
            return
        except BrokenPipeError:
            return
        except Exception as exc:  # internal fault; never leak a traceback
            self._send_json(500, {"error": f"internal error: {exc}"})
            return
        if not handled:
            self._send_json(404, {"error": f"no such endpoint: {self.path}"})

    def _dispatch(self, method: str) -> bool:
        path = self.path.split("?", 1)[0].rstrip("/") or "/"
        parts = [p for p in path.split("/") if p]
        if not parts or parts[0] != "api":
            if method == "GET":
                return self._serve_static(path)
            return False
        m = self.manager
        if parts[1:] == ["formulas"] and method == "GET":
            self._send_json(200, {"formulas": catalog_json()})
            return True
        if parts[1:] == ["sessions"] and method == "POST":
            session = m.create(self._read_body())
            self._send_json(201, _board_json(session))
            return True
        if len(parts) >= 3 and parts[1] == "sessions":
            sid = parts[2]
            tail = parts[3:]
            if not tail and method == "GET":
                self._send_json(200, _board_json(m.get(sid)))
                return True
            if tail == ["moves"] and method == "GET":
                session = m.get(sid)
                moves = m.legal_moves(session)
                self._send_json(
                    200,
                    {
                        "version": session.version,
                        "turn": _role_word(session.state.turn),
                        "closed": session.closed,
                        "moves": [m.move_json(session, mv) for mv in moves],
                    },
                )
                return True
            if tail == ["moves"] and method == "POST":
                session = m.submit(sid, self._read_body())
                self._send_json(200, _board_json(session))
                return True
            if tail == ["auto"] and method == "POST":
                session = m.auto(sid)
                self._send_json(200, _board_json(session))
                return True
            if tail == ["hint"] and method == "GET":
                self._send_json(200, {"hint": m.hint(sid)})
                return True
            if tail == ["transcript"] and method == "GET":
                self._send_json(200, m.transcript(sid))
                return True
        return False

    def _serve_static(self, path: str) -> bool:
        ui_dir = getattr(self.server, "ui_dir", None)
        if ui_dir is None:
            return False
        root = Path(ui_dir).resolve()
        rel = path.lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if root not in target.parents and target != root:
            raise ApiError(404, "not found")
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            return False
        body = target.read_bytes()
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self._cors()
        self.end_headers()
        self.wfile.write(body)
        return True

    def do_GET(self) -> None:
        self._route("GET")

    def do_POST(self) -> None:
        self._route("POST")

    def do_OPTIONS(self) -> None:
        self.send_response(204)
        self._cors()
        self.send_header("Content-Length", "0")
        self.end_headers()


def make_server(
    store_dir: str | Path,
    host: str = "127.0.0.1",
    port: int = 8177,
    ui_dir: str | Path | None = None,
    verbose: bool = False,
) -> ThreadingHTTPServer:
    """Build (but do not start) the API server; caller owns its lifetime."""
    server = ThreadingHTTPServer((host, port), _Handler)
    server.daemon_threads = True
    server.manager = SessionManager(SessionStore(store_dir))
    server.ui_dir = str(ui_dir) if ui_dir else None
    server.verbose = verbose
    return server


def serve_forever(
    store_dir: str | Path,
    host: str = "127.0.0.1",
    port: int = 8177,
    ui_dir: str | Path | None = None,
) -> None:
    server = make_server(store_dir, host, port, ui_dir, verbose=True)
    try:
        server.serve_forever()
    finally:
        server.server_close()
