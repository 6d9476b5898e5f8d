import random

import hypothesis.strategies as st
import pytest
from hypothesis import given

from lproto.compose import compose
from lproto.corpus import CATALOG, get as corpus_get
from lproto.formulas import Signature, Sort, make_ack_chain
from lproto.game import (
    OutcomeKind,
    Player,
    init_game,
    legal_moves_opponent,
    run_play,
    step_game,
)
from lproto.normal import normalize
from lproto.solve import (
    Certificate,
    Greedy,
    SearchLimits,
    VerdictStatus,
    check_omega_instances,
    solve,
    solve_state,
)

from conftest import oracle_formulas, to_normal
from oracles import defender_wins


def _solve_named(name):
    core, sig, entry = corpus_get(name)
    return solve(normalize(core), sig, entry.search_limits)


# -- the verdict suite -------------------------------------------------------

VALID_NAMES = [
    "p_implies_p",
    "q_discharge",
    "peirce",
    "drinker",
    "s_implies_s",
    "s_or_not_s",
    "modus_ponens",
    "ex4",
    "two_packet",
]
INVALID_NAMES = ["p_implies_q", "p_alone", "quantifier_swap"]


@pytest.mark.parametrize("name", VALID_NAMES)
def test_valid_corpus_entries(name):
    verdict = _solve_named(name)
    assert verdict.status is VerdictStatus.VALID, name
    assert verdict.stats.states <= 100_000


@pytest.mark.parametrize("name", INVALID_NAMES)
def test_invalid_corpus_entries(name):
    verdict = _solve_named(name)
    assert verdict.status is VerdictStatus.INVALID, name
    assert verdict.stats.states <= 100_000


def chain_sig(n):
    return Signature.build(
        predicates={f"P{i}": (Sort.ACK,) for i in range(1, n + 1)},
        constants=[],
    )


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ack_chains_valid(n):
    sig = chain_sig(n)
    verdict = solve(normalize(make_ack_chain(sig, n)), sig)
    assert verdict.status is VerdictStatus.VALID
    assert verdict.stats.states <= 100_000


def test_composed_protocol_valid():
    core, sig, entry = corpus_get("drinker")
    nf = normalize(core)
    composed = normalize(compose(nf, nf))
    verdict = solve(composed, sig, entry.search_limits)
    assert verdict.status is VerdictStatus.VALID


# -- determinacy against the reference solver: 200+ cases --------------------


@given(oracle_formulas())
def test_agreement_with_reference_solver(prop_sig, f):
    want = defender_wins(f)
    verdict = solve(to_normal(f), prop_sig)
    assert verdict.status is not VerdictStatus.UNKNOWN
    got = verdict.status is VerdictStatus.VALID
    assert got == want, f"disagreement on {f!r}"


@given(oracle_formulas())
def test_exactly_one_side_wins(prop_sig, f):
    verdict = solve(to_normal(f), prop_sig)
    if verdict.status is VerdictStatus.VALID:
        assert verdict.player_certificate
    else:
        assert verdict.status is VerdictStatus.INVALID
        assert verdict.opponent_certificate


# -- certificate soundness: 200+ randomized replays --------------------------

_CERT_POOL = ["p_implies_p", "q_discharge", "peirce", "drinker", "two_packet", "ex4"]


@given(st.integers(0, 2**32 - 1), st.sampled_from(_CERT_POOL))
def test_certificate_beats_random_opposition(seed, name):
    core, sig, entry = corpus_get(name)
    root = normalize(core)
    verdict = solve(root, sig, entry.search_limits)
    assert verdict.status is VerdictStatus.VALID
    rng = random.Random(seed)
    policy = entry.search_limits.policy()

    class RandomOpponent:
        def choose(self, state):
            return rng.choice(legal_moves_opponent(state, policy))

    transcript = run_play(
        root,
        sig,
        player=Certificate(verdict.player_certificate, Player.PLAYER, entry.search_limits),
        opponent=RandomOpponent(),
        budget=entry.search_limits.max_depth,
    )
    assert transcript.outcome.kind is OutcomeKind.PLAYER_WINS


def test_invalid_certificate_stalls_the_defender():
    core, sig, entry = corpus_get("p_implies_q")
    root = normalize(core)
    verdict = solve(root, sig, entry.search_limits)
    assert verdict.status is VerdictStatus.INVALID
    transcript = run_play(
        root,
        sig,
        player=Greedy(Player.PLAYER, entry.search_limits),
        opponent=Certificate(
            verdict.opponent_certificate, Player.OPPONENT, entry.search_limits
        ),
        budget=30,
    )
    assert transcript.outcome.kind is OutcomeKind.OPPONENT_WINS_AT_CAP


# -- bounded search behavior --------------------------------------------------


def test_unknown_when_budget_too_small():
    core, sig, _ = corpus_get("drinker")
    verdict = solve(normalize(core), sig, SearchLimits(max_states=2, max_depth=2))
    assert verdict.status is VerdictStatus.UNKNOWN
    assert verdict.limit_hit


def test_verdict_stable_as_limits_grow():
    core, sig, _ = corpus_get("peirce")
    root = normalize(core)
    small = solve(root, sig, SearchLimits(max_states=1000))
    big = solve(root, sig, SearchLimits(max_states=100_000))
    assert small.status is VerdictStatus.VALID
    assert big.status is small.status


def test_solve_state_from_mid_game():
    core, sig, _ = corpus_get("drinker")
    state = init_game(normalize(core), sig)
    from lproto.game import Move

    state, _, _ = step_game(state, Move(state.v[0], ()))
    verdict = solve_state(state)
    assert verdict.status is VerdictStatus.VALID


def test_verdict_serializes():
    verdict = _solve_named("drinker")
    blob = verdict.to_json()
    assert blob["status"] == "Valid"
    assert blob["stats"]["states"] > 0
    assert blob["limits"]["max_states"] == 100_000


# -- integer instance sweep ----------------------------------------------------


def test_omega_sweep_small():
    core, sig, entry = corpus_get("n_packet")
    report = check_omega_instances(normalize(core), sig, values=range(3),
                                   limits=entry.search_limits)
    assert report.all_valid
    assert [i.value for i in report.instances] == [0, 1, 2]


def test_omega_sweep_detects_failure():
    core, sig, entry = corpus_get("u_everywhere")
    report = check_omega_instances(normalize(core), sig, values=range(2),
                                   limits=entry.search_limits)
    assert not report.all_valid


def test_catalog_omega_flags_consistent():
    for entry in CATALOG:
        core, sig, ent = corpus_get(entry.name)
        root = normalize(core)
        has_int_root = any(s is Sort.INT for _, s in root.prefix)
        if ent.omega:
            assert has_int_root, f"{entry.name} marked omega but has no integer root"
