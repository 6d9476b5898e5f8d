import pytest
from hypothesis import given

from lproto.formulas import (
    AckConst,
    Atom,
    Falsum,
    Forall,
    FormulaError,
    Implies,
    IntLit,
    Signature,
    Sort,
    alpha_equal,
    expand_sugar,
    free_vars,
)
from lproto.normal import (
    Equation,
    NormalFormula,
    from_formula,
    guard_holds,
    instantiate,
    normalize,
)
from lproto.syntax import parse_formula, parse_signature, print_formula

from conftest import core_formulas


# -- the 200-case suite: idempotence and free variables ---------------------


@given(core_formulas(allow_int=True))
def test_normalize_idempotent(f):
    nf = normalize(f)
    again = normalize(nf.to_formula())
    assert again.key() == nf.key()


@given(core_formulas(allow_int=True))
def test_normalize_preserves_free_variables(f):
    nf = normalize(f)
    assert free_vars(nf.to_formula()) == free_vars(f)


@given(core_formulas(allow_free=False, allow_int=True))
def test_normal_shape_is_strict(f):
    """Every premise is normal, the conclusion atomic, prefix names distinct."""
    nf = normalize(f)

    def check(n: NormalFormula):
        names = [v for v, _ in n.prefix]
        assert len(names) == len(set(names))
        assert isinstance(n.conclusion, (Atom, Falsum))
        for p in n.premises:
            if isinstance(p, Equation):
                continue
            assert isinstance(p, NormalFormula)
            check(p)

    check(nf)


@given(core_formulas(allow_free=False))
def test_normalize_round_trips_through_strict_reader(f):
    nf = normalize(f)
    back = from_formula(nf.to_formula())
    assert back.key() == nf.key()


# -- worked normalizations ---------------------------------------------------


def _norm_text(src, decls):
    sig = parse_signature(decls)
    core = expand_sugar(parse_formula(src, sig), sig)
    return print_formula(normalize(core).to_formula())


def test_quantifier_pulls_out_of_conclusion():
    got = _norm_text("(forall x. P(x)) -> forall x. P(x)", "pred P : ack")
    assert got == "forall y. ((forall x. P(x)) -> P(y))"


def test_premises_flatten():
    got = _norm_text("P(a) -> (Q(a) -> (P(a) -> false))", "pred P : ack\npred Q : ack\nconst a")
    assert got == "P(a) -> Q(a) -> P(a) -> false"


def test_normalize_keeps_normal_input_unchanged():
    sig = parse_signature("pred P : ack\nconst a")
    f = parse_formula("(forall x. ((forall y. (P(x) -> P(y))) -> false)) -> false", sig)
    assert normalize(f).to_formula() == f


def test_strict_reader_rejects_non_normal():
    sig = parse_signature("pred P : ack")
    f = parse_formula("(forall x. P(x)) -> forall x. P(x)", sig)
    with pytest.raises(FormulaError):
        from_formula(f)


def test_alpha_renaming_shares_keys():
    sig = parse_signature("pred P : ack")
    f = normalize(parse_formula("forall x. P(x)", sig))
    g = normalize(parse_formula("forall z. P(z)", sig))
    assert f.key() == g.key()
    assert alpha_equal(f.to_formula(), g.to_formula())


# -- instantiation -----------------------------------------------------------


def _typed_sig():
    return Signature.build(
        predicates={"U": (Sort.INT,), "P": (Sort.INT, Sort.ACK)},
        constants=["a"],
    )


def test_instantiate_splits_guards_and_premises():
    sig = _typed_sig()
    f = parse_formula(
        "forall j. (forall i. (j = s(i) -> U(i) -> U(j)))", sig
    )
    nf = normalize(f)
    assert len(nf.prefix) == 2
    guards, premises, conclusion = instantiate(nf, (IntLit(3), IntLit(2)), sig)
    assert [guard_holds(g, sig) for g in guards] == [True]
    assert [print_formula(p.to_formula()) for p in premises] == ["U(2)"]
    assert print_formula(conclusion) == "U(3)"


def test_instantiate_evaluates_integer_terms():
    sig = _typed_sig()
    nf = normalize(parse_formula("forall i. U(s(s(i)))", sig))
    _guards, _premises, conclusion = instantiate(nf, (IntLit(3),), sig)
    assert conclusion == Atom("U", (IntLit(5),))


def test_guard_failure_detected():
    sig = _typed_sig()
    nf = normalize(parse_formula("forall i. (0 = s(i) -> false)", sig))
    guards, _premises, _conclusion = instantiate(nf, (IntLit(4),), sig)
    assert [guard_holds(g, sig) for g in guards] == [False]


def test_instantiate_checks_value_sorts():
    sig = _typed_sig()
    nf = normalize(parse_formula("forall i. forall x. P(i, x)", sig))
    with pytest.raises(FormulaError):
        instantiate(nf, (AckConst("a"), AckConst("a")), sig)
    with pytest.raises(FormulaError):
        instantiate(nf, (IntLit(1),), sig)


def test_instantiate_reaches_under_binders():
    sig = parse_signature("pred R : ack * ack")
    nf = normalize(parse_formula("forall x. forall y. R(x, y)", sig))
    _g, _p, conclusion = instantiate(nf, (AckConst("u"), AckConst("w")), sig)
    assert conclusion == Atom("R", (AckConst("u"), AckConst("w")))


# -- structural accessors ----------------------------------------------------


def test_key_is_hashable_and_stable():
    sig = parse_signature("pred P : ack\nconst a")
    nf = normalize(parse_formula("P(a) -> P(a)", sig))
    d = {nf.key(): "here"}
    again = normalize(parse_formula("P(a) -> P(a)", sig))
    assert d[again.key()] == "here"


def test_constants_collected():
    sig = parse_signature("pred R : ack * ack\nconst a, b")
    nf = normalize(parse_formula("R(a, b) -> R(b, a)", sig))
    assert set(nf.constants()) == {"a", "b"}


def test_atomic_flag():
    sig = parse_signature("pred P : ack\nconst a")
    atom = normalize(parse_formula("P(a)", sig))
    imp = normalize(parse_formula("P(a) -> P(a)", sig))
    assert atom.is_atomic
    assert not imp.is_atomic
