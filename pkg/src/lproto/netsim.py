"""Network-session view of plays.

A finished (or in-flight) play can be read as a log of a sender and a
receiver exchanging packets.  This module classifies every move of a
transcript into wire events:

* ``Open`` - the sender starts a session or a nested exchange.
* ``HeaderOffer`` - the receiver puts a header on the table, telling the
  sender which acknowledgment slot to use next.
* ``Send`` - the sender delivers a data packet.
* ``Ack`` - the receiver's offer names a packet that is in flight;
  the packet counts as acknowledged.
* ``AckLoss`` - the receiver's offer names no packet even though one is
  in flight; the acknowledgment went missing.
* ``Reinit`` - the receiver abandons the session state and forces a
  restart from the root.
* ``CloseRequest`` - the sender echoes an offered header back, which is
  the conventional way to ask for the session to finish.
* ``Close`` - the receiver consumes a packet conclusion and (for the
  terminal case) wins the play.
* ``OpponentForfeit`` - the sender advanced a move whose arithmetic
  side condition is false, ending the play at once.
* ``Unclassified`` - anything that does not fit the protocol reading;
  plays over non-protocol formulas degrade to this rather than failing.

The classifier is incremental: an :class:`Annotator` watches transcript
rows one at a time and keeps the bookkeeping (packets in flight,
offered headers, acknowledged packets) needed to tell an ``Ack`` from
an ``AckLoss`` or a ``Send`` from a ``CloseRequest``.  ``classify`` is
pure, so a caller can also preview how a candidate move would read on
the wire without committing it.

``simulate`` plays a valid formula end to end: the receiver follows the
search engine's winning strategy but can be perturbed by a
:class:`LossModel` (dropped acknowledgments, close requests, restarts),
while the sender keeps pushing packets until it runs out of honest
moves.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

from .formulas import (
    AckConst,
    Atom,
    Falsum,
    Formula,
    FormulaError,
    IntLit,
    Signature,
    Sort,
)
from .game import (
    GameState,
    IllegalMove,
    Move,
    Outcome,
    OutcomeKind,
    Player,
    StrategyError,
    Transcript,
    TranscriptRow,
    V_EMPTY,
    _move_order_key,
    init_game,
    legal_moves_opponent,
    legal_moves_player,
    step_game,
)
from .normal import NormalFormula, guard_holds, instantiate, normalize
from .solve import Greedy, SearchLimits, VerdictStatus, solve


class SimulationError(FormulaError):
    """Simulation was asked to run something it cannot run."""


class EventKind(str, Enum):
    OPEN = "Open"
    HEADER_OFFER = "HeaderOffer"
    SEND = "Send"
    ACK = "Ack"
    ACK_LOSS = "AckLoss"
    REINIT = "Reinit"
    CLOSE_REQUEST = "CloseRequest"
    CLOSE = "Close"
    OPPONENT_FORFEIT = "OpponentForfeit"
    UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True)
class Packet:
    """A delivered atom read as a packet: predicate name plus header fields.

    Acknowledgment headers are strings (constant names), block numbers are
    ints.  Two packets are the same iff they print the same.
    """

    data: str
    headers: tuple[str | int, ...] = ()

    @property
    def ack_headers(self) -> tuple[str, ...]:
        return tuple(h for h in self.headers if isinstance(h, str))

    @property
    def int_headers(self) -> tuple[int, ...]:
        return tuple(h for h in self.headers if isinstance(h, int))

    def __str__(self) -> str:
        if not self.headers:
            return self.data
        return f"{self.data}({', '.join(str(h) for h in self.headers)})"


def packet_of(conclusion: Formula) -> Packet | None:
    """Read an instantiated atomic conclusion as a packet, if it is one."""
    if not isinstance(conclusion, Atom):
        return None
    headers: list[str | int] = []
    for arg in conclusion.args:
        if isinstance(arg, AckConst):
            headers.append(arg.name)
        elif isinstance(arg, IntLit):
            headers.append(arg.value)
        else:
            return None
    return Packet(conclusion.pred, tuple(headers))


@dataclass(frozen=True)
class NetEvent:
    kind: EventKind
    step: int
    packet: Packet | None = None
    header: str | int | None = None
    detail: str = ""

    def describe(self) -> str:
        base = {
            EventKind.OPEN: "open",
            EventKind.HEADER_OFFER: f"header offer {self.header}",
            EventKind.SEND: f"send {self.packet}",
            EventKind.ACK: f"ack {self.packet} via header {self.header}",
            EventKind.ACK_LOSS: f"ack loss: header {self.header} names no packet",
            EventKind.REINIT: "reinit: session restarted from the root",
            EventKind.CLOSE_REQUEST: f"close request: {self.packet} echoes an offered header",
            EventKind.CLOSE: f"close {self.packet}" if self.packet else "close",
            EventKind.OPPONENT_FORFEIT: "sender forfeit: arithmetic side condition failed",
            EventKind.UNCLASSIFIED: "unclassified move",
        }[self.kind]
        if self.detail:
            return f"{base} ({self.detail})"
        return base

    def to_record(self) -> dict:
        return {
            "kind": self.kind.value,
            "step": self.step,
            "packet": str(self.packet) if self.packet else None,
            "header": self.header,
            "detail": self.detail,
            "text": self.describe(),
        }


class Annotator:
    """Incremental move-to-wire-event classifier.

    ``classify`` inspects a move against the current bookkeeping without
    changing it; ``observe`` classifies a transcript row and then updates
    the bookkeeping.  Feed rows in play order.
    """

    def __init__(self, signature: Signature, root: NormalFormula):
        self.signature = signature
        self.root_key = root.key()
        self.restart_key = NormalFormula((), (root,), Falsum()).key()
        self.pending: dict[Packet, int] = {}
        self.acked: set[Packet] = set()
        self.open_offers: set[str] = set()
        self.stale_offers: set[str] = set()
        self.offered: set[str] = set()
        self.seen_headers: set[str] = set()

    @classmethod
    def for_transcript(cls, transcript: Transcript) -> "Annotator":
        return cls(transcript.signature, transcript.root)

    # -- classification ------------------------------------------------

    def classify(self, mover: Player, move: Move, step: int = 0) -> NetEvent:
        guards, premises, conclusion = instantiate(
            move.formula, move.values, self.signature
        )
        if mover is Player.OPPONENT:
            return self._classify_sender(move, guards, conclusion, step)
        return self._classify_receiver(move, premises, conclusion, step)

    def _classify_sender(self, move, guards, conclusion, step) -> NetEvent:
        if any(not guard_holds(g, self.signature) for g in guards):
            failed = next(g for g in guards if not guard_holds(g, self.signature))
            from .syntax import print_term

            detail = f"{print_term(failed.lhs)} = {print_term(failed.rhs)} is false"
            return NetEvent(EventKind.OPPONENT_FORFEIT, step, detail=detail)
        packet = packet_of(conclusion)
        if move.formula.key() == self.root_key:
            detail = f"announces {packet}" if packet else ""
            return NetEvent(EventKind.OPEN, step, detail=detail)
        if isinstance(conclusion, Falsum):
            return NetEvent(EventKind.OPEN, step, detail="nested exchange")
        if packet is None:
            return NetEvent(EventKind.UNCLASSIFIED, step)
        acks = set(packet.ack_headers)
        if acks & self.open_offers:
            return NetEvent(EventKind.CLOSE_REQUEST, step, packet=packet)
        if acks & self.stale_offers:
            return NetEvent(
                EventKind.CLOSE_REQUEST, step, packet=packet, detail="stale header"
            )
        detail = ""
        if packet in self.acked:
            detail = "resend of an acknowledged packet"
        elif packet in self.pending:
            detail = "retransmission"
        return NetEvent(EventKind.SEND, step, packet=packet, detail=detail)

    def _classify_receiver(self, move, premises, conclusion, step) -> NetEvent:
        if move.formula.key() == self.restart_key:
            return NetEvent(EventKind.REINIT, step)
        if move.formula.is_atomic:
            return NetEvent(EventKind.CLOSE, step, packet=packet_of(conclusion))
        ack_values = [
            value.name
            for (name, sort), value in zip(move.formula.prefix, move.values)
            if sort is Sort.ACK and isinstance(value, AckConst)
        ]
        if isinstance(conclusion, Falsum) and len(ack_values) == 1:
            header = ack_values[0]
            matched = next(
                (p for p in self.pending if header in p.ack_headers), None
            )
            if matched is not None:
                return NetEvent(EventKind.ACK, step, packet=matched, header=header)
            if header in self.offered:
                return NetEvent(
                    EventKind.HEADER_OFFER, step, header=header, detail="re-request"
                )
            if header not in self.seen_headers and self.pending:
                oldest = min(self.pending, key=self.pending.get)
                return NetEvent(
                    EventKind.ACK_LOSS,
                    step,
                    header=header,
                    detail=f"{oldest} left unacknowledged",
                )
            return NetEvent(EventKind.HEADER_OFFER, step, header=header)
        packet = packet_of(conclusion)
        if packet is not None and packet.ack_headers:
            return NetEvent(EventKind.CLOSE, step, packet=packet)
        if packet is not None and premises:
            header = packet.int_headers[0] if packet.int_headers else None
            return NetEvent(
                EventKind.HEADER_OFFER,
                step,
                header=header,
                detail=f"requests {packet}",
            )
        return NetEvent(EventKind.UNCLASSIFIED, step)

    # -- bookkeeping ---------------------------------------------------

    def observe(self, row: TranscriptRow) -> NetEvent:
        event = self.classify(row.mover, row.move, row.step)
        self._apply(event)
        return event

    def _apply(self, event: NetEvent) -> None:
        kind, packet, header = event.kind, event.packet, event.header
        if kind is EventKind.SEND and packet is not None:
            self.seen_headers.update(packet.ack_headers)
            if packet.ack_headers and packet not in self.acked and packet not in self.pending:
                self.pending[packet] = event.step
        elif kind is EventKind.ACK and packet is not None:
            self.pending.pop(packet, None)
            self.acked.add(packet)
            if isinstance(header, str):
                self._record_offer(header)
        elif kind in (EventKind.HEADER_OFFER, EventKind.ACK_LOSS):
            if isinstance(header, str):
                self._record_offer(header)
        elif kind is EventKind.CLOSE and packet is not None:
            dropped = [
                p
                for p in self.pending
                if p.data == packet.data and p.int_headers == packet.int_headers
            ]
            for p in dropped:
                del self.pending[p]
            # the closed packet's header slots are spent; a later packet
            # reusing one starts a new exchange rather than asking to close
            self.open_offers -= set(packet.ack_headers)
        elif kind is EventKind.REINIT:
            self.stale_offers |= self.open_offers
            self.open_offers.clear()
            self.pending.clear()

    def _record_offer(self, header: str) -> None:
        self.offered.add(header)
        self.open_offers.add(header)
        self.stale_offers.discard(header)
        self.seen_headers.add(header)


@dataclass
class SessionTrace:
    """A transcript plus its wire reading, one event per move."""

    transcript: Transcript
    events: list[NetEvent]

    def kinds(self) -> list[EventKind]:
        return [e.kind for e in self.events]

    def of_kind(self, kind: EventKind) -> list[NetEvent]:
        return [e for e in self.events if e.kind is kind]

    def to_records(self) -> dict:
        play = self.transcript.to_records()
        for row, event in zip(play["rows"], self.events):
            row["event"] = event.to_record()
        return play

    def to_timeline(self) -> str:
        lines = []
        for row, event in zip(self.transcript.rows, self.events):
            who = "sender" if row.mover is Player.OPPONENT else "receiver"
            lines.append(f"{event.step:3d} {who:8s} {event.describe()}")
        outcome = self.transcript.outcome
        tail = f"outcome: {outcome.kind.value}"
        if outcome.reason:
            tail += f" ({outcome.reason})"
        lines.append(tail)
        return "\n".join(lines)


def annotate(transcript: Transcript) -> SessionTrace:
    """Classify every row of a finished transcript."""
    annotator = Annotator.for_transcript(transcript)
    events = [annotator.observe(row) for row in transcript.rows]
    return SessionTrace(transcript, events)


# -- lossy simulation ----------------------------------------------------


class _Schedule:
    """A probability per decision; the last entry repeats forever.

    A plain float is a constant rate.  A sequence like ``[1, 0]`` fires
    exactly once: the first applicable decision draws probability 1 and
    every later one draws 0.  Draws are consumed only when the event is
    actually possible at the decision point.
    """

    def __init__(self, spec: float | Sequence[float]):
        if isinstance(spec, (int, float)):
            values = [float(spec)]
        else:
            values = [float(x) for x in spec] or [0.0]
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise SimulationError(f"probabilities must lie in [0, 1]: {values}")
        self.values = values
        self.index = 0

    def draw(self, rng: random.Random) -> bool:
        p = self.values[min(self.index, len(self.values) - 1)]
        self.index += 1
        return rng.random() < p


@dataclass
class LossModel:
    """Perturbations applied while simulating a session.

    Each field is either a constant probability or a per-decision
    schedule (see :class:`_Schedule`).  ``ack_loss`` makes the receiver
    offer a header that names no packet in flight, ``close_request``
    makes the sender echo an offered header instead of pushing new data,
    and ``reinit`` makes the receiver restart the session from the root.
    """

    ack_loss: float | Sequence[float] = 0.0
    close_request: float | Sequence[float] = 0.0
    reinit: float | Sequence[float] = 0.0
    seed: int | None = None


def _minted_fresh(state: GameState, move: Move) -> bool:
    for value in move.values:
        if isinstance(value, AckConst) and value.name.startswith("#"):
            try:
                if int(value.name[1:]) >= state.fresh_count:
                    return True
            except ValueError:
                continue
    return False


class _Receiver:
    """Greedy engine play with scheduled slips."""

    def __init__(self, limits, annotator, rng, ack_loss, reinit):
        self.limits = limits
        self.annotator = annotator
        self.rng = rng
        self.ack_loss = ack_loss
        self.reinit = reinit
        self.greedy = Greedy(Player.PLAYER, limits)

    def choose(self, state: GameState) -> Move:
        restart = state.u_keys().get(state.root_negation_key())
        if restart is not None and self.reinit.draw(self.rng):
            return Move(restart, ())
        if self.annotator.pending:
            moves = sorted(
                legal_moves_player(state, self.limits.policy()), key=_move_order_key
            )
            losable = [
                m
                for m in moves
                if _minted_fresh(state, m)
                and self.annotator.classify(Player.PLAYER, m).kind
                is EventKind.ACK_LOSS
            ]
            if losable and self.ack_loss.draw(self.rng):
                return losable[0]
        return self.greedy.choose(state)


class _Sender:
    """Keeps pushing packets; asks to close only when scheduled.

    Prefers honest (side-condition-true) moves that mint a fresh
    acknowledgment constant, mimicking a sender that labels every new
    packet with a new header.  With no honest move left it plays the
    first move regardless, which forfeits on the spot.
    """

    def __init__(self, policy, signature, annotator, rng, close_request, int_choice=None):
        self.policy = policy
        self.signature = signature
        self.annotator = annotator
        self.rng = rng
        self.close_request = close_request
        self.int_choice = int_choice

    def choose(self, state: GameState) -> Move:
        moves = sorted(legal_moves_opponent(state, self.policy), key=_move_order_key)
        if not moves:
            raise IllegalMove("sender has no move to make")
        honest = []
        for move in moves:
            guards, _, _ = instantiate(move.formula, move.values, self.signature)
            if all(guard_holds(g, self.signature) for g in guards):
                honest.append(move)
        if not honest:
            return moves[0]
        closers = [
            m
            for m in honest
            if self.annotator.classify(Player.OPPONENT, m).kind
            is EventKind.CLOSE_REQUEST
        ]
        if closers and self.close_request.draw(self.rng):
            return closers[0]
        if self.int_choice is not None:
            preferred = [
                m
                for m in honest
                if any(
                    isinstance(v, IntLit) and v.value == self.int_choice
                    for v in m.values
                )
            ]
            if preferred:
                return preferred[0]
        if self.annotator.pending:
            resends = [
                m
                for m in honest
                if (ev := self.annotator.classify(Player.OPPONENT, m)).kind
                is EventKind.SEND
                and ev.packet in self.annotator.pending
            ]
            if resends:
                return resends[0]
        fresh = [m for m in honest if _minted_fresh(state, m)]
        if fresh:
            return fresh[0]
        return honest[0]


def scripted_sender(
    policy,
    signature: Signature,
    annotator: Annotator,
    seed: int | None = 0,
    close_request: float | Sequence[float] = 0.0,
    int_choice: int | None = None,
) -> _Sender:
    """A standalone sender strategy for driving the opponent side.

    With the default zero close-request rate it deterministically pushes
    fresh packets, which reproduces the straight-line session tables.
    """
    return _Sender(
        policy,
        signature,
        annotator,
        random.Random(seed),
        _Schedule(close_request),
        int_choice,
    )


def simulate(
    f: Formula | NormalFormula,
    sig: Signature,
    model: LossModel = LossModel(),
    budget: int = 200,
    limits: SearchLimits = SearchLimits(),
    int_choice: int | None = None,
) -> SessionTrace:
    """Play a valid formula as a lossy network session.

    The formula is solved first; anything but a Valid verdict is
    rejected, since the receiver needs a winning strategy to follow.
    ``int_choice`` biases the sender towards moves that mention that
    block number, which picks the announced block on typed protocols.
    The returned trace carries the transcript and its wire events.
    """
    root = f if isinstance(f, NormalFormula) else normalize(f)
    verdict = solve(root, sig, limits)
    if verdict.status is not VerdictStatus.VALID:
        raise SimulationError(
            f"cannot simulate a formula with verdict {verdict.status.value}; "
            "only valid formulas describe runnable protocols"
        )
    state = init_game(root, sig)
    transcript = Transcript(signature=sig, root=state.root, initial=state)
    annotator = Annotator(sig, state.root)
    rng = random.Random(model.seed)
    receiver = _Receiver(
        limits, annotator, rng, _Schedule(model.ack_loss), _Schedule(model.reinit)
    )
    sender = _Sender(
        limits.policy(), sig, annotator, rng, _Schedule(model.close_request), int_choice
    )
    events: list[NetEvent] = []
    steps = 0
    while True:
        if state.turn is Player.OPPONENT and not state.v:
            transcript.outcome = Outcome(OutcomeKind.PLAYER_WINS, V_EMPTY, steps=steps)
            break
        if steps >= budget:
            transcript.outcome = Outcome(
                OutcomeKind.OPPONENT_WINS_AT_CAP, "budget exhausted", steps=steps
            )
            break
        strategy = sender if state.turn is Player.OPPONENT else receiver
        try:
            move = strategy.choose(state)
            state, outcome, row = step_game(state, move)
        except IllegalMove as exc:
            transcript.final = state
            raise StrategyError(
                f"illegal move at step {steps + 1}: {exc}", transcript
            ) from exc
        steps += 1
        transcript.rows.append(row)
        events.append(annotator.observe(row))
        if outcome.terminal:
            transcript.outcome = replace(outcome, steps=steps)
            break
    transcript.final = state
    return SessionTrace(transcript, events)
