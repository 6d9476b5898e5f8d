"""The two-player evaluation game on normal formulas.

Board: three sets of closed formulas.  U and A only grow; V is replaced
wholesale by each Player move.  A holds atomic formulas only and starts
with falsum.  Play starts from U = {F -> false}, V = {F}, A = {false}
with the Opponent to move.

Opponent move: pick a V member ``forall xs. (Ps -> B)`` and values for
xs; the instantiated premises join U and the conclusion joins A.  If an
instantiated guard equation is false the Opponent loses on the spot.

Player move: pick a U member and values whose instantiated conclusion is
already in A (integer terms are computed first); its guards must hold;
the instantiated premises become the new V.  An empty V at the
Opponent's turn means the Player has won.

Value enumeration is bounded by a pool policy: ack coordinates range
over the constants in play plus at most one fresh constant (while the
fresh budget lasts, fresh names print ``#0``, ``#1``, ...); integer
coordinates range over 0..int_bound plus the integers in play.
Legality itself is not bounded: apply_move accepts any well-sorted
closed values, so scripted replays may use named constants.
"""
from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator, Protocol, Sequence

from .formulas import (
    AckConst,
    Atom,
    Falsum,
    Formula,
    FormulaError,
    IntLit,
    Signature,
    Sort,
    Term,
    canon,
    check_sorts,
    constants_in,
    free_vars,
    int_literals_in,
)
from .normal import (
    Equation,
    NormalFormula,
    from_formula,
    guard_holds,
    instantiate,
    is_normal,
    normalize,
)


class Player(enum.Enum):
    OPPONENT = "opponent"  # moves first, owns V choices
    PLAYER = "player"  # owns U choices

    def other(self) -> "Player":
        return Player.PLAYER if self is Player.OPPONENT else Player.OPPONENT


class IllegalMove(FormulaError):
    """Move rejected: wrong set, bad values, failed guard, or conclusion not in A."""


@dataclass(frozen=True)
class Move:
    formula: NormalFormula
    values: tuple[Term, ...] = ()

    def describe(self) -> str:
        from .syntax import print_formula, print_term

        text = print_formula(self.formula.to_formula())
        if self.values:
            text += " with " + ", ".join(print_term(v) for v in self.values)
        return text


@dataclass(frozen=True)
class PoolPolicy:
    """Bounds for value enumeration (not for legality)."""

    int_bound: int = 4
    fresh_bound: int = 3


class OutcomeKind(enum.Enum):
    ONGOING = "ongoing"
    PLAYER_WINS = "player-wins"
    OPPONENT_WINS_AT_CAP = "opponent-wins-at-cap"


V_EMPTY = "v-empty"
OPPONENT_GUARD_FAILURE = "opponent-guard-failure"


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind
    reason: str | None = None
    steps: int | None = None

    @property
    def terminal(self) -> bool:
        return self.kind is not OutcomeKind.ONGOING


ONGOING = Outcome(OutcomeKind.ONGOING)


@dataclass(frozen=True)
class GameState:
    signature: Signature
    root: NormalFormula
    u: tuple[NormalFormula, ...]
    v: tuple[NormalFormula, ...]
    a: tuple[Formula, ...]
    turn: Player
    fresh_count: int = 0
    history: tuple[tuple[Player, Move], ...] = ()

    # -- derived views ------------------------------------------------------

    def u_keys(self) -> dict[tuple, NormalFormula]:
        return {nf.key(): nf for nf in self.u}

    def v_keys(self) -> dict[tuple, NormalFormula]:
        return {nf.key(): nf for nf in self.v}

    def a_keys(self) -> set[tuple]:
        cached = getattr(self, "_akeys_memo", None)
        if cached is None:
            cached = {canon(x) for x in self.a}
            object.__setattr__(self, "_akeys_memo", cached)
        return cached

    def pool(self) -> list[str]:
        """Ack constants in play, in order of first appearance in U, V, A."""
        cached = getattr(self, "_pool_memo", None)
        if cached is not None:
            return list(cached)
        seen: list[str] = []
        for nf in self.u:
            for c in nf.constants():
                if c not in seen:
                    seen.append(c)
        for nf in self.v:
            for c in nf.constants():
                if c not in seen:
                    seen.append(c)
        for atom in self.a:
            for c in constants_in(atom):
                if c not in seen:
                    seen.append(c)
        object.__setattr__(self, "_pool_memo", tuple(seen))
        return seen

    def ints_in_play(self) -> frozenset[int]:
        cached = getattr(self, "_ints_memo", None)
        if cached is None:
            out: set[int] = set()
            for nf in self.u + self.v:
                out |= nf.int_literals()
            for atom in self.a:
                out |= int_literals_in(atom)
            cached = frozenset(out)
            object.__setattr__(self, "_ints_memo", cached)
        return cached

    def fresh_name(self, offset: int = 0) -> str:
        return f"#{self.fresh_count + offset}"

    def root_negation_key(self) -> tuple:
        return NormalFormula((), (self.root,), Falsum()).key()


def init_game(f: Formula | NormalFormula, sig: Signature) -> GameState:
    """Set up the board for a closed normal formula."""
    nf = f if isinstance(f, NormalFormula) else from_formula(f)
    formula = nf.to_formula()
    if free_vars(formula):
        names = sorted(n for n, _ in free_vars(formula))
        raise FormulaError(f"formula must be closed, free: {', '.join(names)}")
    check_sorts(formula, sig)
    negation = NormalFormula((), (nf,), Falsum())
    return GameState(
        signature=sig,
        root=nf,
        u=(negation,),
        v=(nf,),
        a=(Falsum(),),
        turn=Player.OPPONENT,
    )


# ---------------------------------------------------------------------------
# value enumeration

_FRESH = object()  # sentinel in candidate vectors


def _term_order_key(t: Term) -> tuple:
    match t:
        case AckConst(name):
            return ("a", name)
        case IntLit(v):
            return ("n", str(v).zfill(8))
        case _:
            return ("z", repr(t))


def _move_order_key(m: Move) -> tuple:
    return (m.formula.key(), tuple(_term_order_key(v) for v in m.values))


def _materialize(state: GameState, vector: tuple) -> tuple[Term, ...]:
    out: list[Term] = []
    minted = 0
    for item in vector:
        if item is _FRESH:
            out.append(AckConst(state.fresh_name(minted)))
            minted += 1
        else:
            out.append(item)
    return tuple(out)


def _int_candidates(state: GameState, policy: PoolPolicy) -> list[Term]:
    values = set(range(policy.int_bound + 1)) | state.ints_in_play()
    return [IntLit(n) for n in sorted(values)]


def _ack_candidates(state: GameState, policy: PoolPolicy) -> list:
    out: list = [AckConst(c) for c in state.pool()]
    if state.fresh_count < policy.fresh_bound:
        out.append(_FRESH)
    return out


def legal_moves_opponent(state: GameState, policy: PoolPolicy = PoolPolicy()) -> list[Move]:
    """Every (V formula, value vector) under the pool policy.

    Guard-false moves are included: they are legal and immediately losing
    for the Opponent.
    """
    if state.turn is not Player.OPPONENT:
        raise IllegalMove("not the opponent's turn")
    acks = _ack_candidates(state, policy)
    ints = _int_candidates(state, policy)
    moves: list[Move] = []
    seen: set = set()
    for nf in state.v:
        if nf.key() in seen:
            continue
        seen.add(nf.key())
        per_coord = [acks if sort is Sort.ACK else ints for _, sort in nf.prefix]
        for vector in itertools.product(*per_coord):
            moves.append(Move(nf, _materialize(state, vector)))
    moves.sort(key=_move_order_key)
    return moves


def legal_moves_player(state: GameState, policy: PoolPolicy = PoolPolicy()) -> list[Move]:
    """Every (U formula, value vector) whose conclusion lands in A.

    Coordinates that appear bare in the conclusion are matched against A;
    the rest range over the pool policy.  Guard-false candidates are
    filtered out: the Player must choose values that satisfy the guards.
    Never empty: the root negation (premise root, conclusion falsum) is
    always available.
    """
    if state.turn is not Player.PLAYER:
        raise IllegalMove("not the player's turn")
    acks = _ack_candidates(state, policy)
    ints = _int_candidates(state, policy)
    a_keys = state.a_keys()
    moves: list[Move] = []
    seen: set = set()
    for nf in state.u:
        if nf.key() in seen:
            continue
        seen.add(nf.key())
        names = [name for name, _ in nf.prefix]
        per_coord: list[list] = []
        for name, sort in nf.prefix:
            matched = _conclusion_matches(nf.conclusion, name, state)
            if matched is not None:
                per_coord.append(sorted(matched, key=_term_order_key))
            else:
                per_coord.append(acks if sort is Sort.ACK else ints)
        for vector in itertools.product(*per_coord):
            values = _materialize(state, vector)
            try:
                guards, _, conclusion = instantiate(nf, values, state.signature)
            except FormulaError:
                continue
            if not all(guard_holds(g, state.signature) for g in guards):
                continue
            if canon(conclusion) not in a_keys:
                continue
            moves.append(Move(nf, values))
    moves.sort(key=_move_order_key)
    return moves


def _conclusion_matches(conclusion: Formula, name: str, state: GameState) -> set | None:
    """Values the board offers for a prefix variable appearing bare in the conclusion.

    Returns None when the variable does not occur as a direct argument
    (then the pool policy applies); otherwise the set of values found at
    the matching argument positions of same-predicate atoms in A.
    """
    if not isinstance(conclusion, Atom):
        return None
    positions = [
        i
        for i, arg in enumerate(conclusion.args)
        if getattr(arg, "name", None) == name and not isinstance(arg, AckConst)
    ]
    if not positions:
        return None
    candidates: set | None = None
    for atom in state.a:
        if not isinstance(atom, Atom) or atom.pred != conclusion.pred:
            continue
        if len(atom.args) != len(conclusion.args):
            continue
        here = {atom.args[i] for i in positions}
        if len(here) == 1:  # consistent value across repeated positions
            candidates = here if candidates is None else candidates | here
    return candidates or set()


# ---------------------------------------------------------------------------
# applying moves

def apply_move(state: GameState, move: Move) -> tuple[GameState, Outcome]:
    """Validate and apply one move; returns the new state and its outcome."""
    if state.turn is Player.OPPONENT:
        owned = state.v_keys()
        set_name = "V"
    else:
        owned = state.u_keys()
        set_name = "U"
    key = move.formula.key()
    if key not in owned:
        raise IllegalMove(f"chosen formula is not in {set_name}")
    nf = owned[key]

    try:
        guards, premises, conclusion = instantiate(nf, move.values, state.signature)
    except FormulaError as exc:
        raise IllegalMove(str(exc)) from exc

    minted = [
        v.name
        for v in move.values
        if isinstance(v, AckConst)
        and v.name.startswith("#")
        and v.name[1:].isdigit()
    ]
    fresh_count = state.fresh_count
    for name in minted:
        fresh_count = max(fresh_count, int(name[1:]) + 1)

    guards_ok = all(guard_holds(g, state.signature) for g in guards)

    if state.turn is Player.OPPONENT:
        new_state = replace(
            state,
            turn=Player.PLAYER,
            fresh_count=fresh_count,
            history=state.history + ((Player.OPPONENT, move),),
        )
        if not guards_ok:
            return new_state, Outcome(OutcomeKind.PLAYER_WINS, OPPONENT_GUARD_FAILURE)
        u = list(state.u)
        u_keys = set(state.u_keys())
        for premise in premises:
            if premise.key() not in u_keys:
                u.append(premise)
                u_keys.add(premise.key())
        a = list(state.a)
        a_keys = state.a_keys()
        if canon(conclusion) not in a_keys:
            a.append(conclusion)
        new_state = replace(new_state, u=tuple(u), a=tuple(a))
        return new_state, ONGOING

    # player move
    if not guards_ok:
        raise IllegalMove("a guard equation is false for these values")
    if canon(conclusion) not in state.a_keys():
        raise IllegalMove("conclusion is not in A")
    new_v: list[NormalFormula] = []
    v_keys: set = set()
    for premise in premises:
        if premise.key() not in v_keys:
            new_v.append(premise)
            v_keys.add(premise.key())
    new_state = replace(
        state,
        v=tuple(new_v),
        turn=Player.OPPONENT,
        fresh_count=fresh_count,
        history=state.history + ((Player.PLAYER, move),),
    )
    if not new_v:
        return new_state, Outcome(OutcomeKind.PLAYER_WINS, V_EMPTY)
    return new_state, ONGOING


def resolve_move(state: GameState, formula_text: str, raw_values) -> Move:
    """Build a Move from a printed formula and plain value tokens.

    The formula must print-match something the side to move owns (V for
    the Opponent, U for the Player).  Values are integers for int slots
    and constant names for ack slots; the string "fresh" asks for the
    next unused constant, which is minted here.  Anything that does not
    line up raises IllegalMove; legality beyond that is still checked by
    apply_move.
    """
    from .syntax import print_formula

    if state.turn is Player.OPPONENT:
        table = state.v_keys()
        set_name = "V"
    else:
        table = state.u_keys()
        set_name = "U"
    nf = next(
        (
            f
            for f in table.values()
            if print_formula(f.to_formula()) == formula_text
        ),
        None,
    )
    if nf is None:
        raise IllegalMove(f"chosen formula is not in {set_name}")
    if len(raw_values) != len(nf.prefix):
        raise IllegalMove(
            f"formula takes {len(nf.prefix)} values, got {len(raw_values)}"
        )
    values: list[Term] = []
    offset = 0
    for (var, sort), raw in zip(nf.prefix, raw_values):
        if sort is Sort.INT:
            if isinstance(raw, bool) or not isinstance(raw, int) or raw < 0:
                raise IllegalMove(f"{var} needs a natural number, got {raw!r}")
            values.append(IntLit(raw))
        elif raw == "fresh":
            values.append(AckConst(state.fresh_name(offset)))
            offset += 1
        elif isinstance(raw, str):
            values.append(AckConst(raw))
        else:
            raise IllegalMove(f"{var} needs a constant name, got {raw!r}")
    return Move(nf, tuple(values))


# ---------------------------------------------------------------------------
# strategies and full plays

class Strategy(Protocol):
    def choose(self, state: GameState) -> Move:  # pragma: no cover - protocol
        ...


class Scripted:
    """Plays a fixed move list, then raises."""

    def __init__(self, moves: Sequence[Move]):
        self.moves = list(moves)
        self.index = 0

    def choose(self, state: GameState) -> Move:
        if self.index >= len(self.moves):
            raise IllegalMove("script exhausted")
        move = self.moves[self.index]
        self.index += 1
        return move


class Replay:
    """Replays one side of a finished transcript."""

    def __init__(self, transcript: "Transcript", side: Player):
        self.moves = [m for who, m in transcript.moves() if who is side]
        self.index = 0

    def choose(self, state: GameState) -> Move:
        if self.index >= len(self.moves):
            raise IllegalMove("replay exhausted")
        move = self.moves[self.index]
        self.index += 1
        return move


class Interactive:
    """Delegates to an external chooser callback."""

    def __init__(self, chooser: Callable[[GameState, list[Move]], Move], policy: PoolPolicy = PoolPolicy()):
        self.chooser = chooser
        self.policy = policy

    def choose(self, state: GameState) -> Move:
        if state.turn is Player.OPPONENT:
            options = legal_moves_opponent(state, self.policy)
        else:
            options = legal_moves_player(state, self.policy)
        return self.chooser(state, options)


class StrategyError(FormulaError):
    def __init__(self, message: str, transcript: "Transcript"):
        super().__init__(message)
        self.transcript = transcript


@dataclass
class TranscriptRow:
    step: int
    mover: Player
    move: Move
    u_added: list[NormalFormula]
    v_after: list[NormalFormula]
    a_added: list[Formula]
    note: str = ""


@dataclass
class Transcript:
    signature: Signature
    root: NormalFormula
    initial: GameState
    rows: list[TranscriptRow] = field(default_factory=list)
    outcome: Outcome = ONGOING
    final: GameState | None = None

    def moves(self) -> list[tuple[Player, Move]]:
        return [(row.mover, row.move) for row in self.rows]

    def states(self) -> list[GameState]:
        """Initial state plus the state after each row."""
        out = [self.initial]
        state = self.initial
        for row in self.rows:
            state, _ = apply_move(state, row.move)
            out.append(state)
        return out

    def to_records(self) -> dict:
        from .syntax import print_formula, print_term

        def fmt_nf(nf: NormalFormula) -> str:
            return print_formula(nf.to_formula())

        rows = []
        for row in self.rows:
            rows.append(
                {
                    "step": row.step,
                    "mover": row.mover.value,
                    "formula": fmt_nf(row.move.formula),
                    "values": [print_term(v) for v in row.move.values],
                    "u_added": [fmt_nf(x) for x in row.u_added],
                    "v_after": [fmt_nf(x) for x in row.v_after],
                    "a_added": [print_formula(x) for x in row.a_added],
                    "note": row.note,
                }
            )
        return {
            "root": fmt_nf(self.root),
            "rows": rows,
            "outcome": {
                "kind": self.outcome.kind.value,
                "reason": self.outcome.reason,
                "steps": self.outcome.steps,
            },
        }

    def to_table(self) -> str:
        """Line-oriented table: one row per move with board deltas."""
        from .syntax import print_formula

        def fmt_nf(nf: NormalFormula) -> str:
            return print_formula(nf.to_formula())

        lines = ["step | who | U additions | V | A additions | move"]
        for row in self.rows:
            who = "O" if row.mover is Player.OPPONENT else "P"
            lines.append(
                " | ".join(
                    [
                        str(row.step),
                        who,
                        "; ".join(fmt_nf(x) for x in row.u_added) or "-",
                        "; ".join(fmt_nf(x) for x in row.v_after) or "(empty)",
                        "; ".join(print_formula(x) for x in row.a_added) or "-",
                        row.move.describe() + (f"  [{row.note}]" if row.note else ""),
                    ]
                )
            )
        lines.append(f"outcome: {self.outcome.kind.value}"
                     + (f" ({self.outcome.reason})" if self.outcome.reason else ""))
        return "\n".join(lines)


def step_game(state: GameState, move: Move) -> tuple[GameState, Outcome, TranscriptRow]:
    """apply_move plus a delta row for transcripts."""
    before_u = set(state.u_keys())
    before_a = state.a_keys()
    new_state, outcome = apply_move(state, move)
    row = TranscriptRow(
        step=len(new_state.history),
        mover=state.turn,
        move=move,
        u_added=[nf for nf in new_state.u if nf.key() not in before_u],
        v_after=list(new_state.v),
        a_added=[x for x in new_state.a if canon(x) not in before_a],
    )
    return new_state, outcome, row


def run_play(
    f: Formula | NormalFormula,
    sig: Signature,
    player: Strategy,
    opponent: Strategy,
    budget: int = 200,
    policy: PoolPolicy = PoolPolicy(),
) -> Transcript:
    """Drive a full play; the budget caps total moves.

    Exhausting the budget is a win for the Opponent (an infinite play).
    A strategy returning an illegal move aborts with a StrategyError that
    carries the partial transcript.
    """
    state = init_game(f, sig)
    transcript = Transcript(signature=sig, root=state.root, initial=state)
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
        strategy = opponent if state.turn is Player.OPPONENT else player
        try:
            move = strategy.choose(state)
            state, outcome, row = step_game(state, move)
        except IllegalMove as exc:
            transcript.final = state
            raise StrategyError(f"illegal move at step {steps + 1}: {exc}", transcript) from exc
        steps += 1
        transcript.rows.append(row)
        if outcome.terminal:
            transcript.outcome = replace(outcome, steps=steps)
            break
    transcript.final = state
    return transcript
