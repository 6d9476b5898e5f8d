"""Normal forms: ``forall xs. (P1, ..., Pn -> A)`` with an atomic conclusion.

Premises are themselves normal formulas, or integer equations (from
guards).  ``normalize`` rewrites any core formula into this shape:

* atoms and falsum are already normal;
* ``forall x. G`` normalizes the body and extends the prefix;
* ``G -> H`` normalizes both sides, renames H's prefix away from the
  variables of G, then prepends G to H's premises;
* ``t = u -> H`` does the same with the equation as the new premise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

from .formulas import (
    AckConst,
    AckVar,
    Atom,
    Falsum,
    Formula,
    FormulaError,
    Forall,
    Guard,
    Implies,
    IntLit,
    IntVar,
    Signature,
    Sort,
    Term,
    all_var_names,
    canon,
    evaluate_term,
    fold_int_terms,
    free_vars,
    substitute,
    substitute_term,
    term_is_closed,
)

ACK_NAME_CYCLE = ("x", "y", "z", "w", "v", "u")
INT_NAME_CYCLE = ("i", "j", "k", "l", "m", "n")


def _name_candidates(sort: Sort, start: str) -> Iterator[str]:
    cycle = ACK_NAME_CYCLE if sort is Sort.ACK else INT_NAME_CYCLE
    yield start
    for suffix in ["", "1", "2", "3", "4", "5", "6", "7", "8", "9"]:
        for base in cycle:
            yield base + suffix
    k = 10
    while True:
        for base in cycle:
            yield f"{base}{k}"
        k += 1


@dataclass(frozen=True)
class Equation:
    """An integer equation premise ``lhs = rhs`` (not a formula by itself)."""

    lhs: Term
    rhs: Term


Premise = Union["NormalFormula", Equation]


@dataclass(frozen=True)
class NormalFormula:
    """View of a normal formula: quantifier prefix, premises, atomic conclusion."""

    prefix: tuple[tuple[str, Sort], ...] = ()
    premises: tuple[Premise, ...] = ()
    conclusion: Formula = field(default_factory=Falsum)

    def __post_init__(self) -> None:
        if not isinstance(self.conclusion, (Atom, Falsum)):
            raise FormulaError(f"conclusion must be atomic, got {self.conclusion!r}")
        names = [v for v, _ in self.prefix]
        if len(names) != len(set(names)):
            raise FormulaError(f"prefix variables must be distinct: {names}")

    def to_formula(self) -> Formula:
        cached = getattr(self, "_formula_memo", None)
        if cached is not None:
            return cached
        out: Formula = self.conclusion
        for premise in reversed(self.premises):
            if isinstance(premise, Equation):
                out = Guard(premise.lhs, premise.rhs, out)
            else:
                out = Implies(premise.to_formula(), out)
        for var, sort in reversed(self.prefix):
            out = Forall(var, sort, out)
        object.__setattr__(self, "_formula_memo", out)
        return out

    def key(self) -> tuple:
        cached = getattr(self, "_key_memo", None)
        if cached is None:
            cached = canon(self.to_formula())
            object.__setattr__(self, "_key_memo", cached)
        return cached

    def constants(self) -> tuple[str, ...]:
        """Ack constants in first-appearance order (memoized)."""
        cached = getattr(self, "_consts_memo", None)
        if cached is None:
            from .formulas import constants_in

            cached = tuple(constants_in(self.to_formula()))
            object.__setattr__(self, "_consts_memo", cached)
        return cached

    def size(self) -> int:
        """Node count of the canonical key (memoized); a cheap complexity measure."""
        cached = getattr(self, "_size_memo", None)
        if cached is None:
            cached = _tuple_size(self.key())
            object.__setattr__(self, "_size_memo", cached)
        return cached

    def int_literals(self) -> frozenset[int]:
        """Integer literals occurring anywhere in the formula (memoized)."""
        cached = getattr(self, "_ints_memo", None)
        if cached is None:
            from .formulas import int_literals_in

            cached = frozenset(int_literals_in(self.to_formula()))
            object.__setattr__(self, "_ints_memo", cached)
        return cached

    @property
    def is_atomic(self) -> bool:
        return not self.prefix and not self.premises


def _tuple_size(node) -> int:
    if isinstance(node, tuple):
        return 1 + sum(_tuple_size(item) for item in node)
    return 1


def from_formula(f: Formula) -> NormalFormula:
    """Parse a formula already in normal shape into the view. Raises otherwise.

    Shadowed prefix variables (legal but awkward, e.g. ``forall x. forall x. P(x)``)
    are renamed apart deterministically.
    """
    prefix: list[tuple[str, Sort]] = []
    node = f
    renaming: dict[str, Term] = {}
    while isinstance(node, Forall):
        name = node.var
        if any(name == seen for seen, _ in prefix):
            for candidate in _name_candidates(node.sort, name):
                if candidate != name and all(candidate != seen for seen, _ in prefix):
                    if candidate not in all_var_names(node.body):
                        break
            body = substitute_alpha(node.body, name, candidate, node.sort)
            prefix.append((candidate, node.sort))
            node = body
        else:
            prefix.append((name, node.sort))
            node = node.body

    premises: list[Premise] = []
    while True:
        match node:
            case Implies(l, r):
                premises.append(from_formula(l))
                node = r
            case Guard(l, r, b):
                premises.append(Equation(l, r))
                node = b
            case Atom() | Falsum():
                break
            case _:
                raise FormulaError(f"not in normal form: {node!r}")
    return NormalFormula(tuple(prefix), tuple(premises), node)


def substitute_alpha(f: Formula, old: str, new: str, sort: Sort) -> Formula:
    """Rename free occurrences of a variable (for alpha-conversion of binders)."""
    value: Term = AckVar(new) if sort is Sort.ACK else IntVar(new)

    def go(f: Formula) -> Formula:
        match f:
            case Falsum():
                return f
            case Atom(pred, args):
                return Atom(pred, tuple(substitute_term(a, {old: value}) for a in args))
            case Implies(l, r):
                return Implies(go(l), go(r))
            case Forall(v, s, b):
                return f if v == old else Forall(v, s, go(b))
            case Guard(l, r, b):
                return Guard(
                    substitute_term(l, {old: value}),
                    substitute_term(r, {old: value}),
                    go(b),
                )
        raise FormulaError(f"not a formula: {f!r}")

    return go(f)


def is_normal(f: Formula) -> bool:
    try:
        from_formula(f)  # recurses through premises
    except FormulaError:
        return False
    return True


def _rename_prefix_apart(nf: NormalFormula, avoid: set[str]) -> NormalFormula:
    """Rename nf's prefix so no prefix name lands in ``avoid``.

    A prefix variable keeps its name when possible; otherwise it takes the
    first name from its sort's cycle that avoids both sets and the names
    already present in nf (so nothing gets captured).
    """
    taken = set(avoid)
    own = all_var_names(nf.to_formula())
    renames: list[tuple[str, str, Sort]] = []
    new_prefix: list[tuple[str, Sort]] = []
    for name, sort in nf.prefix:
        if name not in taken:
            chosen = name
        else:
            chosen = next(
                c for c in _name_candidates(sort, name)
                if c not in taken and (c == name or c not in own)
            )
        if chosen != name:
            renames.append((name, chosen, sort))
        new_prefix.append((chosen, sort))
        taken.add(chosen)

    if not renames:
        return nf
    matrix = NormalFormula((), nf.premises, nf.conclusion).to_formula()
    for old, new, sort in renames:
        matrix = substitute_alpha(matrix, old, new, sort)
    inner = from_formula(matrix)
    return NormalFormula(tuple(new_prefix), inner.premises, inner.conclusion)


def normalize(f: Formula) -> NormalFormula:
    """Rewrite a core formula into normal form."""
    match f:
        case Atom() | Falsum():
            return NormalFormula((), (), f)
        case Forall(v, s, b):
            nb = normalize(b)
            if any(v == name for name, _ in nb.prefix):
                nb = _rename_prefix_apart(nb, {v})
            return NormalFormula(((v, s),) + nb.prefix, nb.premises, nb.conclusion)
        case Implies(g, h):
            ng = normalize(g)
            nh = normalize(h)
            nh = _rename_prefix_apart(nh, all_var_names(g))
            return NormalFormula(nh.prefix, (ng,) + nh.premises, nh.conclusion)
        case Guard(l, r, h):
            nh = normalize(h)
            nh = _rename_prefix_apart(nh, _term_var_names(l) | _term_var_names(r))
            return NormalFormula(nh.prefix, (Equation(l, r),) + nh.premises, nh.conclusion)
    raise FormulaError(f"not a core formula: {f!r}")


def _term_var_names(t: Term) -> set[str]:
    match t:
        case AckVar(name) | IntVar(name):
            return {name}
        case _:
            names: set[str] = set()
            if hasattr(t, "args"):
                for a in t.args:  # type: ignore[union-attr]
                    names |= _term_var_names(a)
            return names


# ---------------------------------------------------------------------------
# instantiation (used by the game engine)

def instantiate(
    nf: NormalFormula, values: tuple[Term, ...], sig: Signature
) -> tuple[tuple[Equation, ...], tuple[NormalFormula, ...], Formula]:
    """Plug values into the prefix; return (guards, premises, conclusion).

    Values must be closed and sort-correct.  Closed integer terms in the
    result are folded to literals, so guard equations can be decided and
    the conclusion compared against the board.  Results are memoized per
    formula instance (the search re-instantiates the same board formulas
    constantly); the returned tuples are shared, never mutated.
    """
    values = tuple(values)
    memo = getattr(nf, "_inst_memo", None)
    if memo is None:
        memo = {}
        object.__setattr__(nf, "_inst_memo", memo)
    entry = memo.get(values)
    if entry is not None and entry[0] is sig:
        return entry[1]
    result = _instantiate(nf, values, sig)
    memo[values] = (sig, result)
    return result


def _instantiate(
    nf: NormalFormula, values: tuple[Term, ...], sig: Signature
) -> tuple[tuple[Equation, ...], tuple[NormalFormula, ...], Formula]:
    if len(values) != len(nf.prefix):
        raise FormulaError(
            f"prefix has {len(nf.prefix)} variables, got {len(values)} values"
        )
    binding: dict[str, Term] = {}
    for (name, sort), value in zip(nf.prefix, values):
        if not term_is_closed(value):
            raise FormulaError(f"value for {name} is not closed: {value!r}")
        value_sort = Sort.ACK if isinstance(value, AckConst) else Sort.INT
        if isinstance(value, (AckVar, IntVar)):
            raise FormulaError(f"value for {name} is a variable")
        if value_sort is not sort:
            raise FormulaError(f"value for {name} has sort {value_sort}, expected {sort}")
        binding[name] = value

    guards: list[Equation] = []
    premises: list[NormalFormula] = []
    for premise in nf.premises:
        if isinstance(premise, Equation):
            guards.append(
                Equation(substitute_term(premise.lhs, binding), substitute_term(premise.rhs, binding))
            )
        else:
            inst = substitute(premise.to_formula(), binding)
            premises.append(from_formula(fold_int_terms(inst, sig)))
    conclusion = fold_int_terms(substitute(nf.conclusion, binding), sig)
    return tuple(guards), tuple(premises), conclusion


def guard_holds(eq: Equation, sig: Signature) -> bool:
    """Decide a closed integer equation."""
    return evaluate_term(eq.lhs, sig) == evaluate_term(eq.rhs, sig)
