"""Bounded validity search over canonical game positions.

Positions are keyed up to renaming of ack constants, so plays that
differ only in the names the two sides invent collapse into one node.
Solving is two-phase.  A guided depth-first proof search runs first: it
orders the Player's options (restarts last, fewest premises first) and
treats a revisited position as a loss, which is exact because an
endless session goes to the Opponent.  When it finds a win the verdict
is Valid with a positional certificate.  When it does not, the game
graph is explored breadth-first under the same pool policy and a
backwards attractor pass marks the positions from which the Player can
force a win: a Player node is winning when some successor is, an
Opponent node when all of its guard-respecting successors are (an
Opponent node with no such successor is winning at once, which covers
both an empty V and a board where every Opponent option falsifies a
guard).

Verdicts are asymmetric under truncation.  Valid is sound even when the
exploration hit a limit: the winning region only uses explored moves,
and restricting the Opponent is impossible since Opponent nodes must
have all successors explored to win.  Invalid is only reported when the
graph closed without hitting any limit; otherwise the answer is Unknown
along with which limit tripped.

Both sides get positional certificates: a map from canonical position
keys to a canonically encoded move, replayable on any renamed variant
of the position.
"""
from __future__ import annotations

import enum
import itertools
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .formulas import (
    AckConst,
    Formula,
    FormulaError,
    IntLit,
    Signature,
    Sort,
    Term,
    canon,
    rename_canon,
    substitute_term,
)
from .game import (
    GameState,
    IllegalMove,
    Move,
    Outcome,
    OutcomeKind,
    Player,
    PoolPolicy,
    _move_order_key,
    apply_move,
    init_game,
    legal_moves_opponent,
    legal_moves_player,
)
from .normal import Equation, NormalFormula, from_formula, guard_holds, instantiate


@dataclass(frozen=True)
class SearchLimits:
    max_states: int = 100_000
    max_depth: int = 400
    int_bound: int = 4
    fresh_bound: int = 3

    def policy(self) -> PoolPolicy:
        return PoolPolicy(int_bound=self.int_bound, fresh_bound=self.fresh_bound)


class VerdictStatus(enum.Enum):
    VALID = "Valid"
    INVALID = "Invalid"
    UNKNOWN = "Unknown"


@dataclass
class SearchStats:
    states: int = 0
    edges: int = 0
    max_depth_seen: int = 0
    truncated_nodes: int = 0
    elapsed: float = 0.0


@dataclass
class Verdict:
    status: VerdictStatus
    stats: SearchStats
    limits: SearchLimits
    limit_hit: str | None = None
    player_certificate: dict | None = None
    opponent_certificate: dict | None = None
    distances: dict = field(default_factory=dict)
    winning_keys: set = field(default_factory=set)

    def to_json(self) -> dict:
        return {
            "status": self.status.value,
            "limit_hit": self.limit_hit,
            "stats": {
                "states": self.stats.states,
                "edges": self.stats.edges,
                "max_depth": self.stats.max_depth_seen,
                "truncated": self.stats.truncated_nodes,
                "elapsed_s": round(self.stats.elapsed, 4),
            },
            "limits": {
                "max_states": self.limits.max_states,
                "max_depth": self.limits.max_depth,
                "int_bound": self.limits.int_bound,
                "fresh_bound": self.limits.fresh_bound,
            },
            "certificate_positions": {
                "player": len(self.player_certificate) if self.player_certificate else 0,
                "opponent": len(self.opponent_certificate) if self.opponent_certificate else 0,
            },
        }


# ---------------------------------------------------------------------------
# canonical position keys

_SKELETONS: dict[tuple, tuple[tuple, tuple[str, ...]]] = {}


def _skeleton(key: tuple) -> tuple[tuple, tuple[str, ...]]:
    """The canonical form with constants replaced by occurrence slots.

    Returns (skeleton, slot names): slot i holds the i-th constant
    occurrence in preorder; the skeleton marks it ("c", i).  Cached per
    key, so repeated board formulas are analyzed once.
    """
    hit = _SKELETONS.get(key)
    if hit is not None:
        return hit
    slots: list[str] = []

    def walk(k):
        if isinstance(k, tuple):
            if len(k) == 2 and k[0] == "c":
                slots.append(k[1])
                return ("c", len(slots) - 1)
            return tuple(walk(x) for x in k)
        return k

    skeleton = walk(key)
    result = (skeleton, tuple(slots))
    _SKELETONS[key] = result
    return result


def canonical_state(state: GameState, limits: SearchLimits) -> tuple[tuple, tuple[str, ...]]:
    """Canonical key plus the constant order realizing it.

    Board formulas are reduced to constant-free skeletons with slot
    vectors naming which constant fills each occurrence.  Constants are
    then ranked by iterated occurrence profiles (which slots of which
    skeletons they fill, with already-separated constants told apart).
    Remaining ties fall back on the live names, which can only split
    alpha-equivalent positions into several keys, never merge distinct
    ones: equal keys always arise from a constant bijection.  The fresh
    budget left under the limits is part of the key because it changes
    the available moves.
    """
    items: list[tuple[str, tuple, tuple[str, ...]]] = []  # (tag, skeleton, slot names)
    seen: set = set()
    consts: list[str] = []
    for tag, key in (
        [("u", nf.key()) for nf in state.u]
        + [("v", nf.key()) for nf in state.v]
        + [("a", canon(atom)) for atom in state.a]
    ):
        if (tag, key) in seen:
            continue
        seen.add((tag, key))
        skeleton, slots = _skeleton(key)
        items.append((tag, skeleton, slots))
        for name in slots:
            if name not in consts:
                consts.append(name)
    fresh_left = max(0, limits.fresh_bound - state.fresh_count)

    if not consts:
        key = (state.turn.value, fresh_left, tuple(sorted(i[:2] for i in items)))
        return key, ()

    color = {c: 0 for c in consts}
    for _ in range(len(consts) + 1):
        colored = [
            (tag, skeleton, tuple(color[n] for n in slots))
            for tag, skeleton, slots in items
        ]
        profiles: dict[str, tuple] = {}
        for c in consts:
            entries = []
            for (tag, skeleton, slots), item_colored in zip(items, colored):
                for j, name in enumerate(slots):
                    if name == c:
                        entries.append((tag, skeleton, item_colored[2], j))
            entries.sort()
            profiles[c] = (color[c], tuple(entries))
        ranked = sorted(consts, key=lambda c: (profiles[c], c))
        new_color = {}
        rank = 0
        for i, c in enumerate(ranked):
            if i and profiles[ranked[i - 1]] != profiles[c]:
                rank += 1
            new_color[c] = rank
        stable = new_color == color
        color = new_color
        if stable or len(set(color.values())) == len(consts):
            break

    order = tuple(sorted(consts, key=lambda c: (color[c], c)))
    index = {c: i for i, c in enumerate(order)}
    fingerprint = tuple(
        sorted(
            (tag, skeleton, tuple(index[n] for n in slots))
            for tag, skeleton, slots in items
        )
    )
    return (state.turn.value, fresh_left, fingerprint), order


# ---------------------------------------------------------------------------
# canonical move encoding (for certificates)

def _encode_move(move: Move, state: GameState, order: tuple[str, ...]) -> tuple:
    mapping = {c: f"c{i:03d}" for i, c in enumerate(order)}
    which = "v" if state.turn is Player.OPPONENT else "u"
    fkey = rename_canon(move.formula.key(), mapping)
    tokens: list[tuple] = []
    minted = 0
    for value in move.values:
        if isinstance(value, IntLit):
            tokens.append(("int", value.value))
        elif isinstance(value, AckConst) and value.name in mapping:
            tokens.append(("pool", order.index(value.name)))
        else:
            tokens.append(("fresh", minted))
            minted += 1
    return (which, fkey, tuple(tokens))


def _decode_move(entry: tuple, state: GameState, order: tuple[str, ...]) -> Move:
    which, fkey, tokens = entry
    mapping = {c: f"c{i:03d}" for i, c in enumerate(order)}
    pool = state.v if which == "v" else state.u
    target = None
    for nf in pool:
        if rename_canon(nf.key(), mapping) == fkey:
            target = nf
            break
    if target is None:
        raise IllegalMove("certificate references a formula missing from the board")
    values: list[Term] = []
    for token in tokens:
        kind = token[0]
        if kind == "int":
            values.append(IntLit(token[1]))
        elif kind == "pool":
            idx = token[1]
            if idx >= len(order):
                raise IllegalMove("certificate references a constant missing from the board")
            values.append(AckConst(order[idx]))
        else:
            values.append(AckConst(state.fresh_name(token[1])))
    return Move(target, tuple(values))


# ---------------------------------------------------------------------------
# exploration + attractor

@dataclass
class _Node:
    state: GameState
    order: tuple[str, ...]
    depth: int
    edges: list[tuple[Move, tuple]] | None = None  # None = truncated


def _explore(start: GameState, limits: SearchLimits) -> tuple[dict, tuple, str | None, SearchStats]:
    policy = limits.policy()
    t0 = time.monotonic()
    key0, order0 = canonical_state(start, limits)
    nodes: dict[tuple, _Node] = {key0: _Node(start, order0, 0)}
    queue: deque[tuple] = deque([key0])
    limit_hit: str | None = None
    stats = SearchStats(states=1)

    while queue:
        key = queue.popleft()
        node = nodes[key]
        stats.max_depth_seen = max(stats.max_depth_seen, node.depth)
        if node.depth >= limits.max_depth:
            limit_hit = limit_hit or "max_depth"
            stats.truncated_nodes += 1
            continue
        state = node.state
        if state.turn is Player.OPPONENT:
            moves = legal_moves_opponent(state, policy)
        else:
            moves = legal_moves_player(state, policy)
        edges: list[tuple[Move, tuple]] = []
        truncated = False
        for move in moves:
            succ, outcome = apply_move(state, move)
            if (
                state.turn is Player.OPPONENT
                and outcome.kind is OutcomeKind.PLAYER_WINS
                and outcome.reason == "opponent-guard-failure"
            ):
                continue  # the opponent never volunteers a falsified guard
            skey, sorder = canonical_state(succ, limits)
            if skey not in nodes:
                if len(nodes) >= limits.max_states:
                    limit_hit = limit_hit or "max_states"
                    truncated = True
                    break
                nodes[skey] = _Node(succ, sorder, node.depth + 1)
                stats.states += 1
                queue.append(skey)
            edges.append((move, skey))
        if truncated:
            stats.truncated_nodes += 1
            node.edges = None
        else:
            node.edges = edges
            stats.edges += len(edges)

    stats.elapsed = time.monotonic() - t0
    return nodes, key0, limit_hit, stats


def _attractor(nodes: dict) -> tuple[set, dict]:
    """Player winning region and move-distance ranks via backwards BFS."""
    preds: dict[tuple, list[tuple]] = {k: [] for k in nodes}
    pending: dict[tuple, int] = {}
    queue: deque[tuple] = deque()
    win: set = set()
    rank: dict[tuple, int] = {}

    for key, node in nodes.items():
        if node.edges is None:
            continue  # truncated: unknown, never joins the winning region
        for _, skey in node.edges:
            preds[skey].append(key)
        if node.state.turn is Player.OPPONENT:
            pending[key] = len(node.edges)
            if not node.edges:
                win.add(key)
                rank[key] = 0
                queue.append(key)

    while queue:
        key = queue.popleft()
        for pred in preds[key]:
            node = nodes[pred]
            if node.state.turn is Player.PLAYER:
                if pred not in win:
                    win.add(pred)
                    rank[pred] = rank[key] + 1
                    queue.append(pred)
            else:
                pending[pred] -= 1
                if pending[pred] == 0 and pred not in win:
                    win.add(pred)
                    rank[pred] = rank[key] + 1
                    queue.append(pred)
    return win, rank


def _build_certificates(nodes: dict, win: set, rank: dict) -> tuple[dict, dict]:
    player_cert: dict = {}
    opponent_cert: dict = {}
    for key, node in nodes.items():
        if node.edges is None:
            continue
        if node.state.turn is Player.PLAYER and key in win:
            best = None
            best_rank = None
            for move, skey in node.edges:
                if skey not in win:
                    continue
                r = (rank[skey], _move_order_key(move))
                if best_rank is None or r < best_rank:
                    best_rank = r
                    best = move
            if best is not None:
                player_cert[key] = _encode_move(best, node.state, node.order)
        elif node.state.turn is Player.OPPONENT and key not in win and node.edges:
            best = None
            best_order = None
            for move, skey in node.edges:
                if skey in win:
                    continue
                r = _move_order_key(move)
                if best_order is None or r < best_order:
                    best_order = r
                    best = move
            if best is not None:
                opponent_cert[key] = _encode_move(best, node.state, node.order)
    return player_cert, opponent_cert


# ---------------------------------------------------------------------------
# forward proof search

_BEAM_WIDTHS: tuple[int | None, ...] = (1, None)

_DEAD_ENUM_CAP = 64


def _dead_premise(nf: NormalFormula, pool_ints: frozenset[int], sig: Signature) -> bool:
    """No value choice over the pool satisfies the premise's guard equations.

    Handing the Opponent only such premises ends the session: whichever
    they pick, some guard fails and the move forfeits.  Guards are
    integer equations, so only the integer coordinates need enumerating;
    the premise's own literals join the pool because playing it puts
    them in play.  Shapes whose enumeration would not stay tiny are
    reported live, which can only cost ranking quality, never
    correctness.
    """
    eqs = [p for p in nf.premises if isinstance(p, Equation)]
    if not eqs:
        return False
    memo = getattr(nf, "_dead_memo", None)
    if memo is None:
        memo = {}
        object.__setattr__(nf, "_dead_memo", memo)
    pool = tuple(sorted(pool_ints | nf.int_literals()))
    hit = memo.get(pool)
    if hit is not None:
        return hit
    int_vars = [name for name, sort in nf.prefix if sort is Sort.INT]
    if len(pool) ** len(int_vars) > _DEAD_ENUM_CAP:
        memo[pool] = False
        return False
    dead = True
    for combo in itertools.product(pool, repeat=len(int_vars)):
        binding: dict[str, Term] = {v: IntLit(c) for v, c in zip(int_vars, combo)}
        try:
            if all(
                guard_holds(
                    Equation(
                        substitute_term(q.lhs, binding),
                        substitute_term(q.rhs, binding),
                    ),
                    sig,
                )
                for q in eqs
            ):
                dead = False
                break
        except FormulaError:
            dead = False
            break
    memo[pool] = dead
    return dead


def _prove_win(start: GameState, limits: SearchLimits) -> tuple[bool, dict, set, SearchStats, str | None]:
    """Depth-first search for a Player win, guided by move ordering.

    Revisiting a canonical position along the current line counts
    against the Player: an endless session is an Opponent win, and a
    genuine winning strategy never needs to loop.  Wins found this way
    are therefore real and come with a positional certificate.

    Player options are ranked (restarts last, then fewest and smallest
    premises) and the search runs in passes that widen a beam over that
    ranking: the first pass commits to the top move at every Player
    node, later passes allow more, the final pass everything.  A good
    ranking then proves validity in a tree whose branching comes from
    the Opponent alone.  Wins carry across passes; refutations cannot
    (a beam refutation only says the beam missed), and even in the full
    pass they can be over-pruned by the loop rule, so a failed proof
    says nothing and the caller must fall back to exhaustive search.
    """
    policy = limits.policy()
    t0 = time.monotonic()
    stats = SearchStats()
    win_moves: dict = {}
    win_keys: set = set()
    refuted: set = set()
    onpath: set = set()
    seen: set = set()
    root_neg = start.root_negation_key()
    hits: list[str] = []

    def note(limit: str) -> None:
        if limit not in hits:
            hits.append(limit)

    def ranked_player_moves(state: GameState) -> list[Move]:
        ranked = []
        v_keys = sorted(state.v_keys())
        a_keys = state.a_keys()
        pool_ints = frozenset(range(policy.int_bound + 1)) | state.ints_in_play()
        for move in legal_moves_player(state, policy):
            _, premises, _ = instantiate(move.formula, move.values, state.signature)
            # a move handing over nothing but guard-dead premises wins
            # two plies later no matter what; try those before anything
            kill = 0 if premises and all(
                _dead_premise(p, pool_ints, state.signature) for p in premises
            ) else 1
            restart = 1 if move.formula.key() == root_neg else 0
            pkeys = [p.key() for p in premises]
            # stalling shapes: rebuilding V as it stands, or handing over
            # only atoms the Opponent has already conceded
            noop = 1 if sorted(set(pkeys)) == v_keys else 0
            stale = 1 if premises and all(
                p.is_atomic and k in a_keys for p, k in zip(premises, pkeys)
            ) else 0
            weight = sum(p.size() for p in premises)
            ranked.append(
                ((kill, restart, noop, stale, len(premises), weight, _move_order_key(move)), move)
            )
        ranked.sort(key=lambda pair: pair[0])
        return [move for _, move in ranked]

    def prove(state: GameState, key: tuple, order: tuple, depth: int, beam: int | None) -> bool:
        if key in win_keys:
            return True
        if key in refuted or key in onpath:
            return False
        if depth >= limits.max_depth:
            note("max_depth")
            return False
        if key not in seen:
            if len(seen) >= limits.max_states:
                note("max_states")
                return False
            seen.add(key)
        stats.max_depth_seen = max(stats.max_depth_seen, depth)
        onpath.add(key)
        chosen: Move | None = None
        try:
            if state.turn is Player.OPPONENT:
                ok = True
                for move in legal_moves_opponent(state, policy):
                    succ, outcome = apply_move(state, move)
                    if outcome.kind is OutcomeKind.PLAYER_WINS:
                        continue  # the opponent never volunteers a falsified guard
                    stats.edges += 1
                    skey, sorder = canonical_state(succ, limits)
                    if not prove(succ, skey, sorder, depth + 1, beam):
                        ok = False
                        break
            else:
                options = ranked_player_moves(state)
                if beam is not None:
                    options = options[:beam]
                ok = False
                for move in options:
                    succ, outcome = apply_move(state, move)
                    stats.edges += 1
                    if outcome.kind is OutcomeKind.PLAYER_WINS:
                        chosen = move
                        ok = True
                        break
                    skey, sorder = canonical_state(succ, limits)
                    if prove(succ, skey, sorder, depth + 1, beam):
                        chosen = move
                        ok = True
                        break
        finally:
            onpath.discard(key)
        if ok:
            win_keys.add(key)
            if chosen is not None:
                win_moves[key] = _encode_move(chosen, state, order)
        else:
            refuted.add(key)
        return ok

    key0, order0 = canonical_state(start, limits)
    proved = False
    for beam in _BEAM_WIDTHS:
        refuted.clear()
        if prove(start, key0, order0, 0, beam):
            proved = True
            break
        if "max_states" in hits:
            break
    stats.states = len(seen)
    stats.elapsed = time.monotonic() - t0
    return proved, win_moves, win_keys, stats, (hits[0] if hits else None)


def solve_state(start: GameState, limits: SearchLimits = SearchLimits()) -> Verdict:
    """Decide the game from an arbitrary reachable position.

    A guided proof search runs first; when it finds a winning strategy
    the verdict is Valid with that strategy as the certificate.
    Otherwise the full position graph is explored and the winning
    region computed backwards, which is what supports Invalid verdicts
    (those need every Opponent escape enumerated, so a closed graph).
    """
    proved, win_moves, win_keys, pstats, phit = _prove_win(start, limits)
    if proved:
        return Verdict(
            status=VerdictStatus.VALID,
            stats=pstats,
            limits=limits,
            limit_hit=None,
            player_certificate=win_moves or None,
            opponent_certificate=None,
            distances={},
            winning_keys=win_keys,
        )
    if phit == "max_states":
        # the proof search saw more distinct positions than the budget
        # allows, so exhaustive exploration would be truncated too
        return Verdict(
            status=VerdictStatus.UNKNOWN,
            stats=pstats,
            limits=limits,
            limit_hit=phit,
        )
    nodes, key0, limit_hit, stats = _explore(start, limits)
    win, rank = _attractor(nodes)
    player_cert, opponent_cert = _build_certificates(nodes, win, rank)
    if key0 in win:
        status = VerdictStatus.VALID
    elif limit_hit is None:
        status = VerdictStatus.INVALID
    else:
        status = VerdictStatus.UNKNOWN
    return Verdict(
        status=status,
        stats=stats,
        limits=limits,
        limit_hit=limit_hit,
        player_certificate=player_cert or None,
        opponent_certificate=opponent_cert or None,
        distances=rank,
        winning_keys=win,
    )


def solve(f: Formula | NormalFormula, sig: Signature, limits: SearchLimits = SearchLimits()) -> Verdict:
    """Decide whether the Player has a winning strategy for a closed normal formula."""
    return solve_state(init_game(f, sig), limits)


# ---------------------------------------------------------------------------
# strategies backed by search results

class Certificate:
    """Plays the stored positional certificate for one side."""

    def __init__(self, entries: dict, side: Player, limits: SearchLimits = SearchLimits()):
        self.entries = entries or {}
        self.side = side
        self.limits = limits

    def choose(self, state: GameState) -> Move:
        if state.turn is not self.side:
            raise IllegalMove("certificate strategy asked to move out of turn")
        key, order = canonical_state(state, self.limits)
        entry = self.entries.get(key)
        if entry is None:
            raise IllegalMove("position is outside the certificate")
        return _decode_move(entry, state, order)


class Greedy:
    """Search-guided play for either side.

    A stored certificate move for the current position is played
    outright.  Failing that, as the Player: take any immediately
    winning move, otherwise the move whose successor has the smallest
    known distance-to-win.  As the Opponent: prefer successors outside
    the known winning region, and when everything is lost stall towards
    the largest distance.  Ties break on canonical move order.
    Positions outside the solved graph trigger one re-solve rooted at
    the current position.
    """

    def __init__(self, side: Player, limits: SearchLimits = SearchLimits()):
        self.side = side
        self.limits = limits
        self.distances: dict = {}
        self.winning: set = set()
        self.solved_roots: set = set()
        self.player_cert: dict = {}
        self.opponent_cert: dict = {}

    def _ensure_solved(self, state: GameState, key: tuple) -> None:
        if (
            key in self.distances
            or key in self.solved_roots
            or key in self.winning
            or key in self.player_cert
            or key in self.opponent_cert
        ):
            return
        verdict = solve_state(state, self.limits)
        self.solved_roots.add(key)
        self.distances.update(verdict.distances)
        self.winning |= verdict.winning_keys
        if verdict.player_certificate:
            self.player_cert.update(verdict.player_certificate)
        if verdict.opponent_certificate:
            self.opponent_cert.update(verdict.opponent_certificate)

    def choose(self, state: GameState) -> Move:
        if state.turn is not self.side:
            raise IllegalMove("greedy strategy asked to move out of turn")
        policy = self.limits.policy()
        if self.side is Player.PLAYER:
            moves = legal_moves_player(state, policy)
        else:
            moves = legal_moves_opponent(state, policy)
        if not moves:
            raise IllegalMove("no legal moves available")
        key, order = canonical_state(state, self.limits)
        self._ensure_solved(state, key)
        cert = self.player_cert if self.side is Player.PLAYER else self.opponent_cert
        entry = cert.get(key)
        if entry is not None:
            try:
                return _decode_move(entry, state, order)
            except IllegalMove:
                pass

        infinity = float("inf")
        scored = []
        for move in moves:
            succ, outcome = apply_move(state, move)
            skey, _ = canonical_state(succ, self.limits)
            if self.side is Player.PLAYER:
                if outcome.kind is OutcomeKind.PLAYER_WINS:
                    dist = 0.0
                else:
                    dist = float(self.distances.get(skey, infinity))
                scored.append(((dist, _move_order_key(move)), move))
            else:
                if outcome.kind is OutcomeKind.PLAYER_WINS:
                    lost, stall = 1, 0.0
                elif skey in self.winning:
                    lost, stall = 1, -float(self.distances.get(skey, 0))
                else:
                    lost, stall = 0, 0.0
                scored.append(((lost, stall, _move_order_key(move)), move))
        scored.sort(key=lambda pair: pair[0])
        return scored[0][1]


def greedy_player(limits: SearchLimits = SearchLimits()) -> Greedy:
    return Greedy(Player.PLAYER, limits)


def greedy_opponent(limits: SearchLimits = SearchLimits()) -> Greedy:
    return Greedy(Player.OPPONENT, limits)


# ---------------------------------------------------------------------------
# integer-instance sweep

@dataclass
class InstanceVerdict:
    value: int
    verdict: Verdict


@dataclass
class OmegaReport:
    instances: list[InstanceVerdict]

    @property
    def all_valid(self) -> bool:
        return all(i.verdict.status is VerdictStatus.VALID for i in self.instances)

    @property
    def any_unknown(self) -> bool:
        return any(i.verdict.status is VerdictStatus.UNKNOWN for i in self.instances)

    def to_json(self) -> dict:
        return {
            "instances": [
                {"value": i.value, **i.verdict.to_json()} for i in self.instances
            ],
            "all_valid": self.all_valid,
        }


def check_omega_instances(
    f: Formula | NormalFormula,
    sig: Signature,
    values: Sequence[int] = range(6),
    limits: SearchLimits = SearchLimits(),
) -> OmegaReport:
    """Evidence for validity across integer instances.

    The Opponent's opening move on the root picks its integer
    coordinates; this fixes every integer coordinate to one concrete
    value per instance (ack coordinates take fresh constants) and solves
    the residual game, widening the integer pool to cover the instance.
    """
    start = init_game(f, sig)
    root = start.root
    if not any(sort is Sort.INT for _, sort in root.prefix):
        raise FormulaError("instance sweep needs an integer-quantified root")
    report = OmegaReport(instances=[])
    for n in values:
        terms: list[Term] = []
        minted = 0
        for _, sort in root.prefix:
            if sort is Sort.INT:
                terms.append(IntLit(n))
            else:
                terms.append(AckConst(start.fresh_name(minted)))
                minted += 1
        succ, outcome = apply_move(start, Move(root, tuple(terms)))
        inst_limits = SearchLimits(
            max_states=limits.max_states,
            max_depth=limits.max_depth,
            int_bound=max(limits.int_bound, n),
            fresh_bound=limits.fresh_bound,
        )
        if outcome.kind is OutcomeKind.PLAYER_WINS:
            verdict = Verdict(
                status=VerdictStatus.VALID,
                stats=SearchStats(states=1),
                limits=inst_limits,
            )
        else:
            verdict = solve_state(succ, inst_limits)
        report.instances.append(InstanceVerdict(n, verdict))
    return report
