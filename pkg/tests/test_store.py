import json

import pytest

from lproto.corpus import get as corpus_get
from lproto.formulas import Signature, Sort
from lproto.game import Player
from lproto.netsim import LossModel, simulate
from lproto.normal import normalize
from lproto.solve import SearchLimits, solve
from lproto.store import SessionStore, StoreError, signature_decls
from lproto.syntax import BUILTIN_EVALUATORS, parse_signature


def state_fingerprint(state):
    return (
        sorted(state.u_keys()),
        sorted(state.v_keys()),
        sorted(state.a_keys()),
        state.turn,
        state.fresh_count,
    )


def played_out_session(store, name="drinker", keep_last=0):
    """Create a session and feed it a full engine-vs-engine play."""
    core, sig, entry = corpus_get(name)
    trace = simulate(core, sig, LossModel(seed=3), limits=entry.search_limits)
    session = store.create(
        name, sig, core, human_role=Player.OPPONENT, limits=entry.search_limits
    )
    rows = trace.transcript.rows
    if keep_last:
        rows = rows[:-keep_last]
    for row in rows:
        session.apply(row.move)
        store.append_move(session, row.move)
    return session


def test_session_survives_a_process_restart(tmp_path):
    store = SessionStore(tmp_path)
    session = played_out_session(store)
    assert session.closed and session.version == 6

    reloaded = SessionStore(tmp_path).load(session.id)
    assert reloaded.version == session.version
    assert reloaded.closed
    assert state_fingerprint(reloaded.state) == state_fingerprint(session.state)
    assert reloaded.transcript.to_records() == session.transcript.to_records()
    assert [e.to_record() for e in reloaded.events] == [
        e.to_record() for e in session.events
    ]
    assert reloaded.human_role is Player.OPPONENT
    assert reloaded.limits == session.limits
    assert reloaded.created == session.created


def test_snapshot_mirrors_the_log(tmp_path):
    store = SessionStore(tmp_path)
    session = played_out_session(store)
    snapshot = json.loads(
        (tmp_path / "sessions" / f"{session.id}.snapshot.json").read_text()
    )
    assert snapshot["version"] == 6
    assert snapshot["closed"] is True
    assert snapshot["outcome"]["kind"] == "player-wins"


def test_sessions_keep_separate_logs(tmp_path):
    store = SessionStore(tmp_path)
    first = played_out_session(store)
    second = played_out_session(store, keep_last=2)
    assert first.id != second.id
    assert store.list_sessions() == sorted([first.id, second.id])
    log_lines = (
        (tmp_path / "sessions" / f"{second.id}.jsonl").read_text().splitlines()
    )
    # header plus one record per applied move, nothing from the other session
    assert len(log_lines) == 1 + second.version
    assert all(json.loads(line)["id"] == second.id
               for line in log_lines if json.loads(line).get("type") == "header")


def test_half_played_session_resumes_open(tmp_path):
    store = SessionStore(tmp_path)
    session = played_out_session(store, keep_last=2)
    assert not session.closed
    reloaded = SessionStore(tmp_path).load(session.id)
    assert not reloaded.closed
    assert reloaded.version == 4
    assert state_fingerprint(reloaded.state) == state_fingerprint(session.state)


def test_torn_final_log_line_is_dropped(tmp_path):
    store = SessionStore(tmp_path)
    session = played_out_session(store, keep_last=1)
    log = tmp_path / "sessions" / f"{session.id}.jsonl"
    with open(log, "a", encoding="utf-8") as fh:
        fh.write('{"type": "move", "version": 6, "mover": "pl')  # power cut
    reloaded = SessionStore(tmp_path).load(session.id)
    assert reloaded.version == session.version
    assert state_fingerprint(reloaded.state) == state_fingerprint(session.state)


def test_closed_session_accepts_no_more_moves(tmp_path):
    store = SessionStore(tmp_path)
    session = played_out_session(store)
    move = session.transcript.rows[0].move
    with pytest.raises(StoreError, match="closed"):
        session.apply(move)


def test_unknown_session_raises_key_error(tmp_path):
    with pytest.raises(KeyError):
        SessionStore(tmp_path).load("no-such-id")


def test_unknown_engine_rejected(tmp_path):
    core, sig, _ = corpus_get("drinker")
    with pytest.raises(StoreError, match="engine"):
        SessionStore(tmp_path).create(
            "drinker", sig, core, human_role=Player.PLAYER, engine="psychic"
        )


def test_verdict_cache_round_trips_across_instances(tmp_path):
    core, sig, entry = corpus_get("drinker")
    nf = normalize(core)
    limits = entry.search_limits
    store = SessionStore(tmp_path)
    assert store.cached_verdict(nf, limits) is None
    record = store.cache_verdict(nf, limits, solve(nf, sig, limits))
    assert record["status"] == "Valid"

    again = SessionStore(tmp_path)
    hit = again.cached_verdict(nf, limits)
    assert hit == record
    # tighter limits are a different cache entry
    assert again.cached_verdict(nf, SearchLimits(max_states=17)) is None


def test_torn_verdict_line_is_dropped(tmp_path):
    core, sig, entry = corpus_get("drinker")
    nf = normalize(core)
    store = SessionStore(tmp_path)
    record = store.cache_verdict(nf, entry.search_limits, solve(nf, sig, entry.search_limits))
    with open(tmp_path / "verdicts.jsonl", "a", encoding="utf-8") as fh:
        fh.write('{"key": "abc", "status"')
    again = SessionStore(tmp_path)
    assert again.cached_verdict(nf, entry.search_limits) == record


def test_signature_decls_round_trip():
    sig = Signature.build(
        predicates={
            "P": (Sort.ACK,),
            "R": (Sort.ACK, Sort.ACK),
            "S": (),
            "U": (Sort.INT,),
            "M": (Sort.INT, Sort.ACK),
        },
        constants=["a", "b"],
        functions={"add": BUILTIN_EVALUATORS["add"]},
    )
    decls = signature_decls(sig)
    parsed = parse_signature("\n".join(decls))
    assert signature_decls(parsed) == decls
    assert parsed.predicates == sig.predicates
    assert parsed.constants == sig.constants


def test_corpus_signatures_round_trip_through_decls():
    for name in ("drinker", "two_packet", "n_packet", "n_packet_acked"):
        _, sig, _ = corpus_get(name)
        parsed = parse_signature("\n".join(signature_decls(sig)))
        assert signature_decls(parsed) == signature_decls(sig)
