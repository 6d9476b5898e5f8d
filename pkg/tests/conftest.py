import hypothesis.strategies as st
import pytest
from hypothesis import settings

from lproto.formulas import (
    AckConst,
    AckVar,
    Atom,
    Falsum,
    Forall,
    FunApp,
    Guard,
    Implies,
    IntLit,
    IntVar,
    Signature,
    Sort,
)
from lproto.normal import NormalFormula

# every property suite must run at least 200 randomized cases
settings.register_profile("suite", max_examples=200, deadline=None)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def prop_sig() -> Signature:
    """Three data-only packet kinds, no payloads."""
    return Signature.build(
        predicates={"P": (), "Q": (), "R": ()},
        constants=[],
    )


@pytest.fixture(scope="session")
def ack_sig() -> Signature:
    return Signature.build(
        predicates={"P": (Sort.ACK,), "Q": (Sort.ACK,), "R": (Sort.ACK, Sort.ACK), "S": ()},
        constants=["a", "b", "c"],
    )


@pytest.fixture(scope="session")
def typed_sig() -> Signature:
    return Signature.build(
        predicates={"U": (Sort.INT,), "P": (Sort.INT, Sort.ACK)},
        constants=["a", "b", "c"],
        functions={"add": (2, lambda x, y: x + y)},
    )


# -- variable-free normal formulas, mirrored in the oracle encoding -------

_ATOMS = st.sampled_from(["P", "Q", "R"])


def oracle_formulas(max_depth: int = 3):
    """Tuples in the reference encoding from tests/oracles.py."""
    atom = st.tuples(st.just("atom"), _ATOMS)
    conclusion = st.one_of(atom, st.just(("false",)))

    def imps(children):
        return st.tuples(
            st.just("imp"),
            st.lists(children, min_size=0, max_size=3).map(tuple),
            conclusion,
        )

    return st.recursive(atom, imps, max_leaves=8)


def to_normal(f) -> NormalFormula:
    """Reference encoding -> engine normal formula."""
    if f == ("false",):
        return NormalFormula((), (), Falsum())
    if f[0] == "atom":
        return NormalFormula((), (), Atom(f[1], ()))
    prems = tuple(to_normal(p) for p in f[1])
    concl = Falsum() if f[2] == ("false",) else Atom(f[2][1], ())
    return NormalFormula((), prems, concl)


# -- random core formulas over the ack sort (optionally with integers) ----


@st.composite
def core_formulas(draw, allow_free=True, allow_int=False, max_depth=4):
    free_acks = ["u1", "u2"] if allow_free else []

    def term(bound_acks):
        choices = [st.sampled_from(["a", "b", "c"]).map(AckConst)]
        names = bound_acks + free_acks
        if names:
            choices.append(st.sampled_from(names).map(AckVar))
        return st.one_of(choices)

    def int_term(bound_ints, depth):
        choices = [st.integers(0, 3).map(IntLit)]
        if bound_ints:
            choices.append(st.sampled_from(bound_ints).map(IntVar))
        base = st.one_of(choices)
        if depth <= 0:
            return base
        sub = int_term(bound_ints, depth - 1)
        return st.one_of(
            base,
            st.tuples(sub).map(lambda ts: FunApp("s", ts)),
            st.tuples(sub, sub).map(lambda ts: FunApp("add", ts)),
        )

    def formula(depth, bound_acks, bound_ints):
        kinds = ["atom", "falsum"]
        if depth > 0:
            kinds += ["implies", "implies", "forall", "forall"]
            if allow_int:
                kinds += ["guard", "forall_int"]
        kind = draw(st.sampled_from(kinds))
        if kind == "atom":
            if allow_int and bound_ints and draw(st.booleans()):
                return Atom("U", (draw(int_term(bound_ints, 1)),))
            which = draw(st.sampled_from(["P", "Q", "R", "S"]))
            if which == "S":
                return Atom("S", ())
            if which == "R":
                return Atom("R", (draw(term(bound_acks)), draw(term(bound_acks))))
            return Atom(which, (draw(term(bound_acks)),))
        if kind == "falsum":
            return Falsum()
        if kind == "implies":
            return Implies(
                formula(depth - 1, bound_acks, bound_ints),
                formula(depth - 1, bound_acks, bound_ints),
            )
        if kind == "guard":
            return Guard(
                draw(int_term(bound_ints, 1)),
                draw(int_term(bound_ints, 1)),
                formula(depth - 1, bound_acks, bound_ints),
            )
        if kind == "forall_int":
            var = f"i{len(bound_ints)}"
            return Forall(var, Sort.INT, formula(depth - 1, bound_acks, bound_ints + [var]))
        var = draw(st.sampled_from(["x", "y", "z", f"w{len(bound_acks)}"]))
        return Forall(var, Sort.ACK, formula(depth - 1, bound_acks + [var], bound_ints))

    return formula(max_depth, [], [])


@pytest.fixture(scope="session")
def mixed_sig() -> Signature:
    """Signature covering everything core_formulas can emit."""
    return Signature.build(
        predicates={
            "P": (Sort.ACK,),
            "Q": (Sort.ACK,),
            "R": (Sort.ACK, Sort.ACK),
            "S": (),
            "U": (Sort.INT,),
        },
        constants=["a", "b", "c"],
        functions={"add": (2, lambda x, y: x + y)},
    )
