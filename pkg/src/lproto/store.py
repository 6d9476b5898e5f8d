"""File-backed persistence for play sessions and verdicts.

Each session lives in one append-only JSONL log: a header record with
everything needed to rebuild the initial board (signature declarations,
the normal formula, roles, limits), then one record per move.  Recovery
replays the log from the header; a sibling snapshot file keeps the
latest rendered view for cheap reads but is never the authority.  A
shared verdicts file caches solver results keyed by the canonical
formula and the search limits.

Logs are only ever appended to; snapshots are replaced atomically via a
temp file and ``os.replace``.  A crash mid-append can at worst leave a
trailing partial line, which recovery drops.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .formulas import (
    AckConst,
    BUILTIN_EVALUATORS,
    FormulaError,
    IntLit,
    Signature,
    Term,
)
from .game import (
    GameState,
    IllegalMove,
    Move,
    Outcome,
    Player,
    Transcript,
    init_game,
    step_game,
)
from .netsim import Annotator, NetEvent
from .normal import NormalFormula, normalize
from .solve import SearchLimits, Verdict
from .syntax import parse_formula, parse_signature, print_formula


class StoreError(FormulaError):
    """The store could not do what was asked of it."""


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# -- move (de)serialization ----------------------------------------------


def _key_to_json(node):
    if isinstance(node, tuple):
        return [_key_to_json(item) for item in node]
    return node


def _key_from_json(node):
    if isinstance(node, list):
        return tuple(_key_from_json(item) for item in node)
    return node


def encode_move(move: Move) -> dict:
    values = []
    for v in move.values:
        if isinstance(v, AckConst):
            values.append({"ack": v.name})
        elif isinstance(v, IntLit):
            values.append({"int": v.value})
        else:
            raise StoreError(f"cannot persist move value {v!r}")
    return {"formula": _key_to_json(move.formula.key()), "values": values}


def decode_move(state: GameState, record: dict) -> Move:
    key = _key_from_json(record["formula"])
    table = state.v_keys() if state.turn is Player.OPPONENT else state.u_keys()
    nf = table.get(key)
    if nf is None:
        raise StoreError("logged move references a formula missing from the board")
    values: list[Term] = []
    for item in record["values"]:
        if "ack" in item:
            values.append(AckConst(item["ack"]))
        elif "int" in item:
            values.append(IntLit(item["int"]))
        else:
            raise StoreError(f"bad value record {item!r}")
    return Move(nf, tuple(values))


def signature_decls(sig: Signature) -> list[str]:
    """Declaration lines that re-parse to the same signature."""
    lines = []
    for name in sorted(sig.predicates):
        sorts = sig.predicates[name]
        shown = " * ".join(str(s) for s in sorts) if sorts else "()"
        lines.append(f"pred {name} : {shown}")
    for name in sorted(sig.functions):
        if name in ("0", "s"):
            continue
        arity, evaluator = sig.functions[name]
        builtin = next(
            (b for b, (a, ev) in BUILTIN_EVALUATORS.items() if ev is evaluator and a == arity),
            None,
        )
        if builtin is None:
            raise StoreError(f"function {name} has no named builtin evaluator")
        lines.append(f"fun {name} / {arity} = {builtin}")
    if sig.constants:
        lines.append("const " + ", ".join(sorted(sig.constants)))
    return lines


# -- live sessions --------------------------------------------------------


@dataclass
class LiveSession:
    """A session rebuilt into playable form.

    ``version`` counts applied moves; it doubles as the optimistic
    concurrency stamp for the wire API.  ``closed`` mirrors a terminal
    outcome: closed sessions accept no further moves.
    """

    id: str
    name: str
    human_role: Player
    engine: str
    limits: SearchLimits
    created: str
    updated: str
    signature: Signature
    root: NormalFormula
    state: GameState
    transcript: Transcript
    annotator: Annotator
    events: list[NetEvent] = field(default_factory=list)

    @property
    def version(self) -> int:
        return len(self.transcript.rows)

    @property
    def closed(self) -> bool:
        return self.transcript.outcome.terminal

    @property
    def engine_role(self) -> Player:
        return (
            Player.OPPONENT if self.human_role is Player.PLAYER else Player.PLAYER
        )

    def apply(self, move: Move) -> None:
        """Advance the board; raises IllegalMove without changing anything."""
        if self.closed:
            raise StoreError("session is closed")
        state, outcome, row = step_game(self.state, move)
        self.state = state
        self.transcript.rows.append(row)
        self.transcript.final = state
        if outcome.terminal:
            self.transcript.outcome = Outcome(
                outcome.kind, outcome.reason, steps=self.version
            )
        self.events.append(self.annotator.observe(row))
        self.updated = _now()


_ROLE_WORDS = {"player": Player.PLAYER, "opponent": Player.OPPONENT}


def _role_word(role: Player) -> str:
    return "player" if role is Player.PLAYER else "opponent"


def _fresh_session(
    session_id: str,
    name: str,
    decls: list[str],
    formula_text: str,
    human_role: Player,
    engine: str,
    limits: SearchLimits,
    created: str,
) -> LiveSession:
    sig = parse_signature("\n".join(decls))
    root = normalize(parse_formula(formula_text, sig))
    state = init_game(root, sig)
    transcript = Transcript(signature=sig, root=state.root, initial=state)
    transcript.final = state
    return LiveSession(
        id=session_id,
        name=name,
        human_role=human_role,
        engine=engine,
        limits=limits,
        created=created,
        updated=created,
        signature=sig,
        root=state.root,
        state=state,
        transcript=transcript,
        annotator=Annotator(sig, state.root),
    )


class SessionStore:
    """Append-only JSONL logs plus snapshots plus a verdict cache.

    One lock per session serializes move submission; the store-wide
    lock only guards the lock table and the verdict file.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.sessions_dir = self.root / "sessions"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.verdicts_path = self.root / "verdicts.jsonl"
        self._guard = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}
        self._verdicts: dict[str, dict] = {}
        self._load_verdicts()

    # -- locking -----------------------------------------------------

    def lock(self, session_id: str) -> threading.Lock:
        with self._guard:
            if session_id not in self._locks:
                self._locks[session_id] = threading.Lock()
            return self._locks[session_id]

    # -- paths -------------------------------------------------------

    def _log_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.jsonl"

    def _snapshot_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.snapshot.json"

    # -- session lifecycle --------------------------------------------

    def create(
        self,
        name: str,
        sig: Signature,
        formula,
        human_role: Player,
        engine: str = "greedy",
        limits: SearchLimits = SearchLimits(),
    ) -> LiveSession:
        if engine not in ("greedy", "scripted"):
            raise StoreError(f"unknown engine {engine!r}")
        nf = formula if isinstance(formula, NormalFormula) else normalize(formula)
        session_id = uuid.uuid4().hex[:12]
        created = _now()
        decls = signature_decls(sig)
        header = {
            "type": "header",
            "id": session_id,
            "name": name,
            "signature": decls,
            "formula": print_formula(nf.to_formula()),
            "human_role": _role_word(human_role),
            "engine": engine,
            "limits": {
                "max_states": limits.max_states,
                "max_depth": limits.max_depth,
                "int_bound": limits.int_bound,
                "fresh_bound": limits.fresh_bound,
            },
            "created": created,
        }
        session = _fresh_session(
            session_id, name, decls, header["formula"], human_role, engine, limits, created
        )
        with open(self._log_path(session_id), "x", encoding="utf-8") as fh:
            fh.write(json.dumps(header) + "\n")
        return session

    def append_move(self, session: LiveSession, move: Move) -> None:
        """Persist one applied move (call right after ``session.apply``)."""
        record = {
            "type": "move",
            "version": session.version,
            "mover": _role_word(session.transcript.rows[-1].mover),
            "at": session.updated,
            **encode_move(move),
        }
        with open(self._log_path(session.id), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        self._write_snapshot(session)

    def _write_snapshot(self, session: LiveSession) -> None:
        snapshot = {
            "id": session.id,
            "version": session.version,
            "updated": session.updated,
            "closed": session.closed,
            "outcome": {
                "kind": session.transcript.outcome.kind.value,
                "reason": session.transcript.outcome.reason,
            },
        }
        fd, tmp = tempfile.mkstemp(
            dir=self.sessions_dir, prefix=f".{session.id}.", suffix=".tmp"
        )
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(snapshot, fh)
            os.replace(tmp, self._snapshot_path(session.id))
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise

    def load(self, session_id: str) -> LiveSession:
        """Rebuild a session by replaying its log."""
        path = self._log_path(session_id)
        if not path.exists():
            raise KeyError(session_id)
        header = None
        moves: list[dict] = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError:
                    break  # torn final write; everything before it stands
                if record.get("type") == "header":
                    header = record
                elif record.get("type") == "move":
                    moves.append(record)
        if header is None:
            raise StoreError(f"session log {session_id} has no header")
        limits = SearchLimits(**header["limits"])
        session = _fresh_session(
            header["id"],
            header["name"],
            header["signature"],
            header["formula"],
            _ROLE_WORDS[header["human_role"]],
            header.get("engine", "greedy"),
            limits,
            header["created"],
        )
        for record in sorted(moves, key=lambda r: r["version"]):
            move = decode_move(session.state, record)
            try:
                session.apply(move)
            except IllegalMove as exc:
                raise StoreError(
                    f"log replay of session {session_id} hit an illegal move: {exc}"
                ) from exc
            session.updated = record.get("at", session.updated)
        return session

    def list_sessions(self) -> list[str]:
        return sorted(p.stem for p in self.sessions_dir.glob("*.jsonl"))

    # -- verdict cache -------------------------------------------------

    def _load_verdicts(self) -> None:
        if not self.verdicts_path.exists():
            return
        with open(self.verdicts_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError:
                    break
                self._verdicts[record["key"]] = record

    @staticmethod
    def verdict_key(nf: NormalFormula, limits: SearchLimits) -> str:
        basis = repr(
            (
                nf.key(),
                limits.max_states,
                limits.max_depth,
                limits.int_bound,
                limits.fresh_bound,
            )
        )
        return hashlib.sha256(basis.encode()).hexdigest()[:32]

    def cached_verdict(self, nf: NormalFormula, limits: SearchLimits) -> dict | None:
        return self._verdicts.get(self.verdict_key(nf, limits))

    def cache_verdict(
        self, nf: NormalFormula, limits: SearchLimits, verdict: Verdict
    ) -> dict:
        key = self.verdict_key(nf, limits)
        record = {
            "key": key,
            "formula": print_formula(nf.to_formula()),
            "status": verdict.status.value,
            "states": verdict.stats.states,
            "elapsed": verdict.stats.elapsed,
            "limit_hit": verdict.limit_hit,
            "at": _now(),
        }
        with self._guard:
            self._verdicts[key] = record
            with open(self.verdicts_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record) + "\n")
        return record
