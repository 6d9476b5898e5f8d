"""Protocol engine for formulas read as network protocols.

A formula specifies a protocol; a play of the associated two-party
game is one communication session over it.  The package provides the
formula language (`formulas`, `syntax`, `normal`), the session game
(`game`), a bounded decision procedure (`solve`), sequential protocol
composition (`compose`), a lossy-network simulator with wire-event
annotation (`netsim`), a persistent session store (`store`), an HTTP
session service (`service`), and a command line front end (`cli`).
"""

from .compose import compose, final_occurrences
from .corpus import CATALOG, get as corpus_get, load_bundled
from .formulas import (
    AckConst,
    AckVar,
    Atom,
    Falsum,
    Formula,
    FormulaError,
    Forall,
    FunApp,
    Guard,
    Implies,
    IntLit,
    IntVar,
    Signature,
    Sort,
    Term,
    expand_sugar,
    make_ack_chain,
    substitute,
)
from .game import (
    GameState,
    IllegalMove,
    Interactive,
    Move,
    Outcome,
    OutcomeKind,
    Player,
    PoolPolicy,
    Replay,
    Scripted,
    StrategyError,
    Transcript,
    init_game,
    legal_moves_opponent,
    legal_moves_player,
    resolve_move,
    run_play,
    step_game,
)
from .netsim import (
    Annotator,
    EventKind,
    LossModel,
    NetEvent,
    Packet,
    SessionTrace,
    SimulationError,
    annotate,
    scripted_sender,
    simulate,
)
from .normal import NormalFormula, from_formula, instantiate, normalize
from .solve import (
    Greedy,
    SearchLimits,
    Verdict,
    VerdictStatus,
    check_omega_instances,
    solve,
    solve_state,
)
from .store import SessionStore, StoreError
from .syntax import ParseError, load_lp, parse_formula, parse_lp, print_formula

__version__ = "0.1.0"

__all__ = [
    "AckConst",
    "AckVar",
    "Annotator",
    "Atom",
    "CATALOG",
    "EventKind",
    "Falsum",
    "Forall",
    "Formula",
    "FormulaError",
    "FunApp",
    "GameState",
    "Greedy",
    "Guard",
    "IllegalMove",
    "Implies",
    "IntLit",
    "IntVar",
    "Interactive",
    "LossModel",
    "Move",
    "NetEvent",
    "NormalFormula",
    "Outcome",
    "OutcomeKind",
    "Packet",
    "ParseError",
    "Player",
    "PoolPolicy",
    "Replay",
    "Scripted",
    "SearchLimits",
    "SessionStore",
    "SessionTrace",
    "Signature",
    "SimulationError",
    "Sort",
    "StoreError",
    "StrategyError",
    "Term",
    "Transcript",
    "Verdict",
    "VerdictStatus",
    "annotate",
    "check_omega_instances",
    "compose",
    "corpus_get",
    "expand_sugar",
    "final_occurrences",
    "from_formula",
    "init_game",
    "instantiate",
    "legal_moves_opponent",
    "legal_moves_player",
    "load_bundled",
    "load_lp",
    "make_ack_chain",
    "normalize",
    "parse_formula",
    "parse_lp",
    "print_formula",
    "resolve_move",
    "run_play",
    "scripted_sender",
    "simulate",
    "solve",
    "solve_state",
    "step_game",
    "substitute",
]
