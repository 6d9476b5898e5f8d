"""Two-sorted terms and formulas with implication, falsum and forall as primitives.

Everything else (negation, conjunction, disjunction, biconditional, xor,
existentials) is sugar that ``expand_sugar`` rewrites away.  Sorts:

* ``ack``: uninterpreted names, inhabited by declared constants and the
  fresh constants a play mints (printed ``#0``, ``#1``, ...).
* ``int``: naturals built from function symbols.  Closed integer terms
  are kept evaluated (``IntLit``) and printed as decimals; ``0`` and the
  successor ``s`` are always in the function table.

Equations ``t = u`` over integer terms are not formulas on their own;
they only occur as guards, i.e. the premise position of ``Guard(t, u, body)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Sequence, Union


class Sort(enum.Enum):
    ACK = "ack"
    INT = "int"

    def __str__(self) -> str:
        return self.value


class FormulaError(Exception):
    """Malformed term, formula, or signature."""


class SortError(FormulaError):
    """A term does not fit the sort of the position it occupies."""


class EvaluationError(FormulaError):
    """Closed-term evaluation failed, went negative, or blew its budget."""


# ---------------------------------------------------------------------------
# signature

def _builtin_zero() -> int:
    return 0


def _builtin_succ(n: int) -> int:
    return n + 1


def _builtin_add(a: int, b: int) -> int:
    return a + b


def _builtin_mul(a: int, b: int) -> int:
    return a * b


#: evaluators that ``fun NAME / ARITY = BUILTIN`` declarations may reference
BUILTIN_EVALUATORS: dict[str, tuple[int, Callable[..., int]]] = {
    "zero": (0, _builtin_zero),
    "succ": (1, _builtin_succ),
    "add": (2, _builtin_add),
    "mul": (2, _builtin_mul),
}

DEFAULT_EVAL_BUDGET = 10_000


@dataclass(frozen=True)
class Signature:
    """Predicate, function and constant declarations. Immutable once built.

    ``predicates`` maps a name to the tuple of its argument sorts (0-ary
    predicates map to ``()``).  ``functions`` maps a name to (arity,
    evaluator); evaluators must be total on naturals.  Names are unique
    across all three categories.
    """

    predicates: Mapping[str, tuple[Sort, ...]] = field(default_factory=dict)
    functions: Mapping[str, tuple[int, Callable[..., int]]] = field(default_factory=dict)
    constants: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        names: list[str] = []
        names += list(self.predicates)
        names += list(self.functions)
        names += list(self.constants)
        if len(names) != len(set(names)):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise FormulaError(f"duplicate declaration of {', '.join(dupes)}")
        for fn, (arity, _) in self.functions.items():
            if arity < 0:
                raise FormulaError(f"negative arity for function {fn}")

    @classmethod
    def build(
        cls,
        predicates: Mapping[str, Sequence[Sort]] | None = None,
        constants: Sequence[str] = (),
        functions: Mapping[str, tuple[int, Callable[..., int]]] | None = None,
    ) -> "Signature":
        """Assemble a signature, always including ``0`` and ``s``."""
        funcs: dict[str, tuple[int, Callable[..., int]]] = {
            "0": (0, _builtin_zero),
            "s": (1, _builtin_succ),
        }
        if functions:
            funcs.update(functions)
        preds = {name: tuple(sorts) for name, sorts in (predicates or {}).items()}
        return cls(predicates=preds, functions=funcs, constants=frozenset(constants))


# ---------------------------------------------------------------------------
# terms

@dataclass(frozen=True)
class IntVar:
    name: str


@dataclass(frozen=True)
class AckVar:
    name: str


@dataclass(frozen=True)
class AckConst:
    name: str


@dataclass(frozen=True)
class IntLit:
    value: int

    def __post_init__(self) -> None:
        if self.value < 0:
            raise FormulaError(f"integer literals are naturals, got {self.value}")


@dataclass(frozen=True)
class FunApp:
    fn: str
    args: tuple["Term", ...] = ()


Term = Union[IntVar, AckVar, AckConst, IntLit, FunApp]


def term_sort(t: Term) -> Sort:
    if isinstance(t, (AckVar, AckConst)):
        return Sort.ACK
    return Sort.INT


def term_is_closed(t: Term) -> bool:
    match t:
        case IntVar() | AckVar():
            return False
        case FunApp(_, args):
            return all(term_is_closed(a) for a in args)
        case _:
            return True


def evaluate_term(t: Term, sig: Signature, budget: int = DEFAULT_EVAL_BUDGET) -> int:
    """Compute the natural a closed integer term denotes.

    ``budget`` caps the number of function applications; exceeding it (or
    an evaluator raising / returning a non-natural) is an EvaluationError.
    """
    remaining = [budget]

    def go(t: Term) -> int:
        match t:
            case IntLit(v):
                return v
            case IntVar(name) | AckVar(name):
                raise EvaluationError(f"free variable {name} in integer term")
            case AckConst(name):
                raise SortError(f"ack constant {name} in integer position")
            case FunApp(fn, args):
                if fn not in sig.functions:
                    raise EvaluationError(f"undeclared function {fn}")
                arity, evaluator = sig.functions[fn]
                if len(args) != arity:
                    raise EvaluationError(f"{fn} expects {arity} arguments, got {len(args)}")
                remaining[0] -= 1
                if remaining[0] < 0:
                    raise EvaluationError(f"evaluation budget of {budget} exhausted")
                vals = [go(a) for a in args]
                try:
                    out = evaluator(*vals)
                except Exception as exc:  # evaluator must be total; report if not
                    raise EvaluationError(f"evaluator {fn} failed on {vals}: {exc}") from exc
                if not isinstance(out, int) or out < 0:
                    raise EvaluationError(f"evaluator {fn} returned {out!r}, expected a natural")
                return out
        raise EvaluationError(f"cannot evaluate {t!r}")

    return go(t)


# ---------------------------------------------------------------------------
# formulas

@dataclass(frozen=True)
class Falsum:
    pass


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    sort: Sort
    body: "Formula"


@dataclass(frozen=True)
class Guard:
    """``lhs = rhs -> body``: an integer equation guarding a formula."""

    lhs: Term
    rhs: Term
    body: "Formula"


Formula = Union[Falsum, Atom, Implies, Forall, Guard]


# sugar layer ---------------------------------------------------------------

@dataclass(frozen=True)
class Not:
    body: "SurfaceFormula"


@dataclass(frozen=True)
class And:
    lhs: "SurfaceFormula"
    rhs: "SurfaceFormula"


@dataclass(frozen=True)
class Or:
    lhs: "SurfaceFormula"
    rhs: "SurfaceFormula"


@dataclass(frozen=True)
class Iff:
    lhs: "SurfaceFormula"
    rhs: "SurfaceFormula"


@dataclass(frozen=True)
class Xor:
    lhs: "SurfaceFormula"
    rhs: "SurfaceFormula"


@dataclass(frozen=True)
class Exists:
    var: str
    sort: Sort
    body: "SurfaceFormula"


SurfaceFormula = Union[Formula, Not, And, Or, Iff, Xor, Exists]


def expand_sugar(f: SurfaceFormula, sig: Signature | None = None) -> Formula:
    """Rewrite sugar into the implication/falsum/forall core.

    not F        => F -> false
    F and G      => (F, G -> false) -> false
    F or G       => not F, not G -> false
    F iff G      => ((F -> G), (G -> F) -> false) -> false
    F xor G      => not F iff G
    exists x. F  => (forall x. (F -> false)) -> false

    When ``sig`` is given the result is checked for well-sortedness.
    """

    def neg(g: Formula) -> Formula:
        return Implies(g, Falsum())

    def go(f: SurfaceFormula) -> Formula:
        match f:
            case Falsum() | Atom():
                return f
            case Implies(l, r):
                return Implies(go(l), go(r))
            case Forall(v, s, b):
                return Forall(v, s, go(b))
            case Guard(l, r, b):
                return Guard(l, r, go(b))
            case Not(b):
                return neg(go(b))
            case And(l, r):
                return neg(Implies(go(l), Implies(go(r), Falsum())))
            case Or(l, r):
                return Implies(neg(go(l)), Implies(neg(go(r)), Falsum()))
            case Iff(l, r):
                fl, fr = go(l), go(r)
                return neg(Implies(Implies(fl, fr), Implies(Implies(fr, fl), Falsum())))
            case Xor(l, r):
                return go(Iff(Not(l), r))
            case Exists(v, s, b):
                return neg(Forall(v, s, neg(go(b))))
        raise FormulaError(f"not a formula: {f!r}")

    out = go(f)
    if sig is not None:
        check_sorts(out, sig)
    return out


def check_sorts(f: Formula, sig: Signature, _env: dict[str, Sort] | None = None) -> None:
    """Validate predicate arities/sorts, guard sorts, and variable usage."""
    env = dict(_env or {})

    def check_term(t: Term, expected: Sort, where: str) -> None:
        match t:
            case AckConst(name):
                if name not in sig.constants and not name.startswith("#"):
                    raise SortError(f"undeclared constant {name} in {where}")
                if expected is not Sort.ACK:
                    raise SortError(f"ack constant {name} in int position in {where}")
            case AckVar(name):
                if env.get(name, Sort.ACK) is not Sort.ACK or expected is not Sort.ACK:
                    raise SortError(f"variable {name} used at both sorts in {where}")
            case IntVar(name):
                if env.get(name, Sort.INT) is not Sort.INT or expected is not Sort.INT:
                    raise SortError(f"variable {name} used at both sorts in {where}")
            case IntLit(_):
                if expected is not Sort.INT:
                    raise SortError(f"integer literal in ack position in {where}")
            case FunApp(fn, args):
                if expected is not Sort.INT:
                    raise SortError(f"integer term {fn}(...) in ack position in {where}")
                if fn not in sig.functions:
                    raise SortError(f"undeclared function {fn} in {where}")
                arity, _ = sig.functions[fn]
                if len(args) != arity:
                    raise SortError(f"{fn} expects {arity} arguments in {where}")
                for a in args:
                    check_term(a, Sort.INT, where)

    def go(f: Formula, path: str) -> None:
        match f:
            case Falsum():
                return
            case Atom(pred, args):
                if pred not in sig.predicates:
                    raise SortError(f"undeclared predicate {pred} at {path}")
                sorts = sig.predicates[pred]
                if len(args) != len(sorts):
                    raise SortError(
                        f"{pred} expects {len(sorts)} arguments, got {len(args)} at {path}"
                    )
                for i, (a, s) in enumerate(zip(args, sorts)):
                    check_term(a, s, f"{pred} argument {i} at {path}")
            case Implies(l, r):
                go(l, path + ".l")
                go(r, path + ".r")
            case Forall(v, s, b):
                saved = env.get(v)
                env[v] = s
                go(b, path + ".b")
                if saved is None:
                    del env[v]
                else:
                    env[v] = saved
            case Guard(l, r, b):
                check_term(l, Sort.INT, f"guard at {path}")
                check_term(r, Sort.INT, f"guard at {path}")
                go(b, path + ".g")
            case _:
                raise FormulaError(f"not a core formula at {path}: {f!r}")

    go(f, "root")


# ---------------------------------------------------------------------------
# variables, substitution, alpha equivalence

def free_vars(f: Formula) -> set[tuple[str, Sort]]:
    out: set[tuple[str, Sort]] = set()

    def term(t: Term, bound: frozenset[str]) -> None:
        match t:
            case AckVar(name):
                if name not in bound:
                    out.add((name, Sort.ACK))
            case IntVar(name):
                if name not in bound:
                    out.add((name, Sort.INT))
            case FunApp(_, args):
                for a in args:
                    term(a, bound)

    def go(f: Formula, bound: frozenset[str]) -> None:
        match f:
            case Falsum():
                pass
            case Atom(_, args):
                for a in args:
                    term(a, bound)
            case Implies(l, r):
                go(l, bound)
                go(r, bound)
            case Forall(v, _, b):
                go(b, bound | {v})
            case Guard(l, r, b):
                term(l, bound)
                term(r, bound)
                go(b, bound)

    go(f, frozenset())
    return out


def all_var_names(f: Formula) -> set[str]:
    """Every variable name occurring in f, bound or free (binders included)."""
    out: set[str] = set()

    def term(t: Term) -> None:
        match t:
            case AckVar(name) | IntVar(name):
                out.add(name)
            case FunApp(_, args):
                for a in args:
                    term(a)

    def go(f: Formula) -> None:
        match f:
            case Atom(_, args):
                for a in args:
                    term(a)
            case Implies(l, r):
                go(l)
                go(r)
            case Forall(v, _, b):
                out.add(v)
                go(b)
            case Guard(l, r, b):
                term(l)
                term(r)
                go(b)
            case _:
                pass

    go(f)
    return out


def constants_in(f: Formula) -> list[str]:
    """Ack constants in f, in order of first appearance."""
    seen: list[str] = []

    def term(t: Term) -> None:
        match t:
            case AckConst(name):
                if name not in seen:
                    seen.append(name)
            case FunApp(_, args):
                for a in args:
                    term(a)

    def go(f: Formula) -> None:
        match f:
            case Atom(_, args):
                for a in args:
                    term(a)
            case Implies(l, r):
                go(l)
                go(r)
            case Forall(_, _, b):
                go(b)
            case Guard(l, r, b):
                term(l)
                term(r)
                go(b)
            case _:
                pass

    go(f)
    return seen


def int_literals_in(f: Formula) -> set[int]:
    out: set[int] = set()

    def term(t: Term) -> None:
        match t:
            case IntLit(v):
                out.add(v)
            case FunApp(_, args):
                for a in args:
                    term(a)

    def go(f: Formula) -> None:
        match f:
            case Atom(_, args):
                for a in args:
                    term(a)
            case Implies(l, r):
                go(l)
                go(r)
            case Forall(_, _, b):
                go(b)
            case Guard(l, r, b):
                term(l)
                term(r)
                go(b)
            case _:
                pass

    go(f)
    return out


def substitute_term(t: Term, binding: Mapping[str, Term]) -> Term:
    match t:
        case AckVar(name) | IntVar(name):
            if name in binding:
                value = binding[name]
                if term_sort(value) is not term_sort(t):
                    raise SortError(f"substituting {term_sort(value)} value for {name}")
                return value
            return t
        case FunApp(fn, args):
            return FunApp(fn, tuple(substitute_term(a, binding) for a in args))
        case _:
            return t


def substitute(f: Formula, binding: Mapping[str, Term]) -> Formula:
    """Capture-checked substitution of closed terms for free variables."""
    for name, value in binding.items():
        if not term_is_closed(value):
            raise FormulaError(f"substitution value for {name} is not closed: {value!r}")

    def go(f: Formula, binding: Mapping[str, Term]) -> Formula:
        if not binding:
            return f
        match f:
            case Falsum():
                return f
            case Atom(pred, args):
                return Atom(pred, tuple(substitute_term(a, binding) for a in args))
            case Implies(l, r):
                return Implies(go(l, binding), go(r, binding))
            case Forall(v, s, b):
                inner = {k: t for k, t in binding.items() if k != v}
                return Forall(v, s, go(b, inner))
            case Guard(l, r, b):
                return Guard(
                    substitute_term(l, binding), substitute_term(r, binding), go(b, binding)
                )
        raise FormulaError(f"not a formula: {f!r}")

    return go(f, binding)


def fold_int_terms(f: Formula, sig: Signature) -> Formula:
    """Evaluate every closed integer subterm down to a literal."""

    def term(t: Term) -> Term:
        match t:
            case FunApp(_, _) if term_is_closed(t):
                return IntLit(evaluate_term(t, sig))
            case FunApp(fn, args):
                return FunApp(fn, tuple(term(a) for a in args))
            case _:
                return t

    def go(f: Formula) -> Formula:
        match f:
            case Falsum():
                return f
            case Atom(pred, args):
                return Atom(pred, tuple(term(a) for a in args))
            case Implies(l, r):
                return Implies(go(l), go(r))
            case Forall(v, s, b):
                return Forall(v, s, go(b))
            case Guard(l, r, b):
                return Guard(term(l), term(r), go(b))
        raise FormulaError(f"not a formula: {f!r}")

    return go(f)


def canon(f: Formula) -> tuple:
    """Nameless canonical form: bound variables become binder indices.

    Two formulas are alpha-equivalent exactly when their canonical forms
    are equal.  Free variables and constants stay by name.  The result
    is memoized on the formula object: the search canonicalizes the
    same shared board formulas over and over.
    """
    cached = f.__dict__.get("_canon_memo")
    if cached is not None:
        return cached

    def term(t: Term, env: Mapping[str, int]) -> tuple:
        match t:
            case AckVar(name):
                return ("b", env[name]) if name in env else ("fa", name)
            case IntVar(name):
                return ("b", env[name]) if name in env else ("fi", name)
            case AckConst(name):
                return ("c", name)
            case IntLit(v):
                return ("n", v)
            case FunApp(fn, args):
                return ("f", fn, tuple(term(a, env) for a in args))
        raise FormulaError(f"not a term: {t!r}")

    def go(f: Formula, env: Mapping[str, int], depth: int) -> tuple:
        match f:
            case Falsum():
                return ("false",)
            case Atom(pred, args):
                return ("atom", pred, tuple(term(a, env) for a in args))
            case Implies(l, r):
                return ("imp", go(l, env, depth), go(r, env, depth))
            case Forall(v, s, b):
                return ("all", s.value, go(b, {**env, v: depth}, depth + 1))
            case Guard(l, r, b):
                return ("guard", term(l, env), term(r, env), go(b, env, depth))
        raise FormulaError(f"not a formula: {f!r}")

    result = go(f, {}, 0)
    object.__setattr__(f, "_canon_memo", result)
    return result


def alpha_equal(f: Formula, g: Formula) -> bool:
    return canon(f) == canon(g)


def rename_canon(key: tuple, const_map: Mapping[str, int]) -> tuple:
    """Rewrite ``("c", name)`` leaves of a canonical form through const_map."""
    if not isinstance(key, tuple):
        return key
    if len(key) == 2 and key[0] == "c":
        name = key[1]
        if name in const_map:
            return ("c", const_map[name])
        return key
    return tuple(rename_canon(k, const_map) if isinstance(k, tuple) else k for k in key)


def equal_modulo_predicates(f: Formula, g: Formula) -> bool:
    """Alpha equality up to a bijective renaming of predicate symbols."""

    def relabel(key: tuple, mapping: dict[str, int]) -> tuple:
        if not isinstance(key, tuple):
            return key
        if key and key[0] == "atom":
            name = key[1]
            if name not in mapping:
                mapping[name] = len(mapping)
            return ("atom", mapping[name], key[2])
        return tuple(relabel(k, mapping) if isinstance(k, tuple) else k for k in key)

    return relabel(canon(f), {}) == relabel(canon(g), {})


# ---------------------------------------------------------------------------
# atomic occurrences (for composition)

class Polarity(enum.Enum):
    POS = "+"
    NEG = "-"

    def flip(self) -> "Polarity":
        return Polarity.NEG if self is Polarity.POS else Polarity.POS


@dataclass(frozen=True)
class AtomicOccurrence:
    """One atomic occurrence inside a normal formula.

    ``path`` walks the core tree ("body" under a forall, "lhs"/"rhs" of an
    implication, "guard" under a guard).  ``hypothesis_count`` is the number
    of premises of the enclosing ``forall xs. (P1, ..., Pk -> A)`` whose
    conclusion this occurrence is.
    """

    path: tuple[str, ...]
    atom: Formula
    sign: Polarity
    hypothesis_count: int


def occurrences(f: Formula) -> list[AtomicOccurrence]:
    """All atomic occurrences of a normal formula, with sign and premise count.

    Signs flip on the left of implications and are preserved on the right
    and under quantifiers.  Raises on non-normal input.
    """
    out: list[AtomicOccurrence] = []

    def go(f: Formula, path: tuple[str, ...], sign: Polarity) -> None:
        node = f
        while isinstance(node, Forall):
            path = path + ("body",)
            node = node.body
        premises: list[tuple[Formula, tuple[str, ...]]] = []
        while True:
            match node:
                case Implies(l, r):
                    premises.append((l, path + ("lhs",)))
                    path = path + ("rhs",)
                    node = r
                case Guard(_, _, b):
                    premises.append((None, ()))  # an equation counts as a premise
                    path = path + ("guard",)
                    node = b
                case Atom() | Falsum():
                    break
                case _:
                    raise FormulaError(f"not in normal form at {'.'.join(path)}")
        out.append(AtomicOccurrence(path, node, sign, len(premises)))
        for premise, ppath in premises:
            if premise is not None:
                go(premise, ppath, sign.flip())

    go(f, (), Polarity.POS)
    return out


# ---------------------------------------------------------------------------
# acknowledgement chains

def make_ack_chain(sig: Signature, n: int, prefix: str = "P") -> Formula:
    """The n-packet acknowledgement formula over predicates P1 ... Pn.

    Level 1 is ``exists x. forall y. (P1(x) -> P1(y))``; level k+1 wraps
    the previous level as ``exists x. forall y. ((F_k -> P_{k+1}(x)) ->
    P_{k+1}(y))``.  Each Pi must be declared with a single ack argument.
    """
    if n < 1:
        raise FormulaError(f"chain length must be >= 1, got {n}")
    for i in range(1, n + 1):
        name = f"{prefix}{i}"
        if sig.predicates.get(name) != (Sort.ACK,):
            raise FormulaError(f"predicate {name} with one ack argument is not declared")

    def level(i: int) -> Formula:
        p = f"{prefix}{i}"
        px = Atom(p, (AckVar("x"),))
        py = Atom(p, (AckVar("y"),))
        if i == 1:
            body: Formula = Implies(px, py)
        else:
            body = Implies(Implies(level(i - 1), px), py)
        return expand_sugar(Exists("x", Sort.ACK, Forall("y", Sort.ACK, body)))

    return level(n)
