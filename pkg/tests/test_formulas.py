import pytest
from hypothesis import given
import hypothesis.strategies as st

from lproto.formulas import (
    AckConst,
    AckVar,
    Atom,
    Falsum,
    Forall,
    FormulaError,
    FunApp,
    Guard,
    Implies,
    IntLit,
    IntVar,
    Signature,
    Sort,
    alpha_equal,
    canon,
    expand_sugar,
    fold_int_terms,
    free_vars,
    make_ack_chain,
    substitute,
)

from conftest import core_formulas


def test_exactly_two_sorts():
    assert {s for s in Sort} == {Sort.ACK, Sort.INT}
    assert str(Sort.ACK) == "ack" and str(Sort.INT) == "int"


def test_signature_always_has_zero_and_successor():
    sig = Signature.build(predicates={"P": (Sort.ACK,)}, constants=["a"])
    assert "0" in sig.functions and "s" in sig.functions
    zero_arity, zero_fn = sig.functions["0"]
    succ_arity, succ_fn = sig.functions["s"]
    assert zero_arity == 0 and zero_fn() == 0
    assert succ_arity == 1 and succ_fn(4) == 5


def test_signature_rejects_name_collisions():
    with pytest.raises(FormulaError):
        Signature.build(predicates={"a": ()}, constants=["a"])


def test_funapp_arity_checked_on_fold():
    sig = Signature.build(predicates={"U": (Sort.INT,)}, constants=[])
    bad = FunApp("s", (IntLit(1), IntLit(2)))
    with pytest.raises(FormulaError):
        fold_int_terms(bad, sig)


def test_fold_evaluates_closed_terms():
    sig = Signature.build(
        predicates={"U": (Sort.INT,)},
        constants=[],
        functions={"add": (2, lambda x, y: x + y)},
    )
    t = FunApp("add", (FunApp("s", (IntLit(1),)), IntLit(3)))
    assert fold_int_terms(Atom("U", (t,)), sig) == Atom("U", (IntLit(5),))
    open_t = FunApp("s", (IntVar("i"),))
    assert fold_int_terms(Atom("U", (open_t,)), sig) == Atom("U", (open_t,))


# -- the shorthand connectives reduce to the three primitives --------------


def _sig():
    return Signature.build(
        predicates={"P": (Sort.ACK,), "Q": (Sort.ACK,)}, constants=["a"]
    )


def _core_ops(f):
    seen = set()

    def walk(g):
        seen.add(type(g).__name__)
        if isinstance(g, Implies):
            walk(g.lhs), walk(g.rhs)
        elif isinstance(g, Forall):
            walk(g.body)
        elif isinstance(g, Guard):
            walk(g.body)

    walk(f)
    return seen


def test_sugar_eliminated(ack_sig):
    from lproto.syntax import parse_formula

    for src in [
        "not P(a)",
        "P(a) and Q(a)",
        "P(a) or Q(a)",
        "exists x. P(x)",
        "exists x. (P(x) and not Q(x))",
    ]:
        core = expand_sugar(parse_formula(src, ack_sig), ack_sig)
        assert _core_ops(core) <= {"Atom", "Falsum", "Implies", "Forall", "Guard"}


def test_negation_shape(ack_sig):
    from lproto.syntax import parse_formula, print_formula

    core = expand_sugar(parse_formula("not P(a)", ack_sig), ack_sig)
    assert print_formula(core) == "P(a) -> false"


def test_disjunction_shape(ack_sig):
    from lproto.syntax import parse_formula, print_formula

    core = expand_sugar(parse_formula("P(a) or Q(a)", ack_sig), ack_sig)
    # both disjuncts denied leads to absurdity, with no outer negation
    assert print_formula(core) == "(P(a) -> false) -> (Q(a) -> false) -> false"


def test_conjunction_shape(ack_sig):
    from lproto.syntax import parse_formula, print_formula

    core = expand_sugar(parse_formula("P(a) and Q(a)", ack_sig), ack_sig)
    assert print_formula(core) == "(P(a) -> Q(a) -> false) -> false"


def test_existential_shape(ack_sig):
    from lproto.syntax import parse_formula, print_formula

    core = expand_sugar(parse_formula("exists x. P(x)", ack_sig), ack_sig)
    assert print_formula(core) == "(forall x. (P(x) -> false)) -> false"


# -- renaming equivalence: 200+ randomized cases ---------------------------


@given(core_formulas())
def test_alpha_reflexive(f):
    assert alpha_equal(f, f)
    assert canon(f) == canon(f)


@given(core_formulas(), core_formulas())
def test_alpha_agrees_with_canon(f, g):
    assert alpha_equal(f, g) == (canon(f) == canon(g))


def _rename_all_bound(f, suffix, env=None):
    """Structural renamer used only by this test: var -> var + suffix."""
    env = env or {}

    def term(t):
        if isinstance(t, AckVar) and t.name in env:
            return AckVar(env[t.name])
        if isinstance(t, IntVar) and t.name in env:
            return IntVar(env[t.name])
        if isinstance(t, FunApp):
            return FunApp(t.fn, tuple(term(a) for a in t.args))
        return t

    if isinstance(f, Atom):
        return Atom(f.pred, tuple(term(a) for a in f.args))
    if isinstance(f, Falsum):
        return f
    if isinstance(f, Implies):
        return Implies(
            _rename_all_bound(f.lhs, suffix, env), _rename_all_bound(f.rhs, suffix, env)
        )
    if isinstance(f, Guard):
        return Guard(term(f.lhs), term(f.rhs), _rename_all_bound(f.body, suffix, env))
    if isinstance(f, Forall):
        fresh = f.var + suffix
        return Forall(
            fresh, f.sort, _rename_all_bound(f.body, suffix, {**env, f.var: fresh})
        )
    raise AssertionError(f"unexpected node {f!r}")


@given(core_formulas(allow_free=False))
def test_alpha_invariant_under_bound_renaming(f):
    g = _rename_all_bound(f, "_renamed")
    assert alpha_equal(f, g)
    h = _rename_all_bound(f, "_other")
    assert alpha_equal(g, h)


@given(core_formulas())
def test_alpha_distinguishes_predicates(f):
    sig = _sig()
    g = Implies(f, Atom("P", (AckConst("a"),)))
    h = Implies(f, Atom("Q", (AckConst("a"),)))
    assert not alpha_equal(g, h)


# -- substitution -----------------------------------------------------------


def test_substitute_hits_free_occurrences_only():
    f = Implies(
        Atom("P", (AckVar("x"),)),
        Forall("x", Sort.ACK, Atom("P", (AckVar("x"),))),
    )
    g = substitute(f, {"x": AckConst("a")})
    assert g == Implies(
        Atom("P", (AckConst("a"),)),
        Forall("x", Sort.ACK, Atom("P", (AckVar("x"),))),
    )


def test_substitute_rejects_open_values():
    # only closed terms may be plugged in, which rules out capture entirely
    f = Forall("x", Sort.ACK, Atom("R", (AckVar("x"), AckVar("y"))))
    with pytest.raises(FormulaError):
        substitute(f, {"y": AckVar("x")})


def test_substitute_checks_sorts():
    f = Atom("P", (AckVar("x"),))
    with pytest.raises(FormulaError):
        substitute(f, {"x": IntLit(3)})


@given(core_formulas())
def test_substitute_noop_for_absent_variable(f):
    assert substitute(f, {"no_such_var": AckConst("a")}) == f


# -- acknowledgement chains -------------------------------------------------


def chain_sig(n):
    return Signature.build(
        predicates={f"P{i}": (Sort.ACK,) for i in range(1, n + 1)},
        constants=[],
    )


def test_chain_level_one_shape():
    from lproto.syntax import print_formula

    f = make_ack_chain(chain_sig(1), 1)
    assert (
        print_formula(f)
        == "(forall x. ((forall y. (P1(x) -> P1(y))) -> false)) -> false"
    )


def test_chain_recurrence():
    from lproto.syntax import print_formula

    f2 = make_ack_chain(chain_sig(2), 2)
    assert print_formula(f2) == (
        "(forall x. ((forall y. ((((forall x. ((forall y. (P1(x) -> P1(y)))"
        " -> false)) -> false) -> P2(x)) -> P2(y))) -> false)) -> false"
    )


def test_chain_requires_declared_predicates():
    with pytest.raises(FormulaError):
        make_ack_chain(chain_sig(1), 2)


def test_free_vars_of_closed_chain():
    assert free_vars(make_ack_chain(chain_sig(3), 3)) == set()
