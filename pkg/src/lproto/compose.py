"""Sequential composition of protocol formulas.

A formula's final occurrences are the atoms a defender can only justify
by finishing the whole session: the negatively signed atoms whose clause
carries no hypotheses.  Composing G after F grafts a copy of F in front
of each such atom, so every closing send in G first requires a complete
F session.  On the acknowledgement chains this reproduces the next chain
level: grafting the one-packet formula onto itself gives the two-packet
formula up to renaming its predicate letters.
"""
from __future__ import annotations

from .formulas import (
    Atom,
    AtomicOccurrence,
    Falsum,
    Forall,
    Formula,
    FormulaError,
    Guard,
    Implies,
    Polarity,
    free_vars,
    occurrences,
)
from .normal import NormalFormula


def _as_formula(f: Formula | NormalFormula) -> Formula:
    return f.to_formula() if isinstance(f, NormalFormula) else f


def final_occurrences(f: Formula | NormalFormula) -> list[AtomicOccurrence]:
    """Negative atomic occurrences with no hypotheses, in tree order.

    Falsum occurrences never count: only predicate atoms can be grafted
    onto.  Raises on non-normal input.
    """
    return [
        occ
        for occ in occurrences(_as_formula(f))
        if occ.sign is Polarity.NEG
        and occ.hypothesis_count == 0
        and isinstance(occ.atom, Atom)
    ]


def compose(g: Formula | NormalFormula, f: Formula | NormalFormula) -> Formula:
    """Graft f in front of every final occurrence of g.

    Each final atom A of g becomes ``f -> A``.  Both formulas must be in
    normal form and f must be closed (a copy of it lands under g's
    quantifiers, so free variables would be captured).  A g without
    final occurrences composes to itself.
    """
    g = _as_formula(g)
    f = _as_formula(f)
    if free_vars(f):
        names = sorted(n for n, _ in free_vars(f))
        raise FormulaError(f"grafted formula must be closed, free: {', '.join(names)}")
    occurrences(f)  # raises if f is not normal
    targets = {occ.path for occ in final_occurrences(g)}

    def walk(node: Formula, path: tuple[str, ...]) -> Formula:
        match node:
            case Forall(v, s, body):
                return Forall(v, s, walk(body, path + ("body",)))
            case Implies(l, r):
                return Implies(walk(l, path + ("lhs",)), walk(r, path + ("rhs",)))
            case Guard(l, r, body):
                return Guard(l, r, walk(body, path + ("guard",)))
            case Atom() if path in targets:
                return Implies(f, node)
            case Atom() | Falsum():
                return node
        raise FormulaError(f"not a formula: {node!r}")

    return walk(g, ())
