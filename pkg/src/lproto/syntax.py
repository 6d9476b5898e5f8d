"""Surface syntax: parsing, printing, and ``.lp`` corpus files.

Formula grammar (whitespace-insensitive, ``#`` starts a line comment)::

    formula := "forall" var+ "." formula
             | "exists" var+ "." formula
             | guard
             | impl
    guard   := term "=" term "->" formula
    impl    := iff { "," iff } "->" formula     (premise list, right assoc)
             | iff [ "->" formula ]
    iff     := or { ("<->" | "xor") or }
    or      := and { ("or" | "\\/") and }
    and     := unary { ("and" | "/\\") unary }
    unary   := "not" unary | atom
    atom    := "false" | NAME [ "(" term { "," term } ")" ] | "(" formula ")"
    term    := NAME [ "(" term { "," term } ")" ] | NAT

Quantifiers scope as far right as possible.  ``t = u`` is only a guard
prefix, never a formula on its own.  Variable sorts are inferred from the
positions a variable occupies (predicate argument sorts, function
arguments and guard sides force ``int``); a variable with no constraining
occurrence defaults by its first letter, ``i``..``n`` meaning ``int``.

Signature declarations, one per line::

    pred NAME : SORT [* SORT]*     or   pred NAME : ()
    fun NAME / ARITY = BUILTIN          (zero, succ, add, mul)
    const NAME [, NAME]*

An ``.lp`` file is one signature block followed by named formulas, each
``formula NAME := FORMULA`` (the body may span lines).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .formulas import (
    AckConst,
    AckVar,
    And,
    Atom,
    BUILTIN_EVALUATORS,
    Exists,
    Falsum,
    Formula,
    FormulaError,
    Forall,
    FunApp,
    Guard,
    Iff,
    Implies,
    IntLit,
    IntVar,
    Not,
    Or,
    Signature,
    Sort,
    SurfaceFormula,
    Term,
    Xor,
)


class ParseError(FormulaError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        where = f" at line {line}, column {col}" if line else ""
        super().__init__(f"{message}{where}")


# ---------------------------------------------------------------------------
# lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow>->)
  | (?P<iff><->)
  | (?P<land>/\\)
  | (?P<lor>\\/)
  | (?P<assign>:=)
  | (?P<nat>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>[().,=:*/])
    """,
    re.VERBOSE,
)

KEYWORDS = {"forall", "exists", "not", "and", "or", "xor", "false"}


@dataclass(frozen=True)
class Token:
    kind: str  # "name" | "nat" | "kw" | one of the fixed spellings
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    out: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", line, col)
        text = m.group(0)
        kind = m.lastgroup or ""
        if kind not in ("ws", "comment"):
            if kind == "name" and text in KEYWORDS:
                out.append(Token("kw", text, line, col))
            elif kind in ("arrow", "iff", "land", "lor", "assign", "sym"):
                out.append(Token(text, text, line, col))
            else:
                out.append(Token(kind, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    return out


# ---------------------------------------------------------------------------
# raw parse tree (names unresolved until the signature pass)

@dataclass
class Binder:
    name: str
    line: int
    col: int
    kind: str  # "forall" | "exists"
    sort: Sort | None = None


@dataclass(frozen=True)
class RName:
    name: str
    line: int
    col: int


@dataclass(frozen=True)
class RNat:
    value: int
    line: int
    col: int


@dataclass(frozen=True)
class RApp:
    name: str
    args: tuple["RTerm", ...]
    line: int
    col: int


RTerm = RName | RNat | RApp


@dataclass(frozen=True)
class RAtom:
    name: str
    args: tuple[RTerm, ...]
    line: int
    col: int
    parenthesized_zero: bool = False


@dataclass(frozen=True)
class RFalse:
    pass


@dataclass(frozen=True)
class RNot:
    body: "RFormula"


@dataclass(frozen=True)
class RBin:
    op: str  # "implies" | "and" | "or" | "iff" | "xor"
    lhs: "RFormula"
    rhs: "RFormula"


@dataclass(frozen=True)
class RQuant:
    binder: Binder
    body: "RFormula"


@dataclass(frozen=True)
class RGuard:
    lhs: RTerm
    rhs: RTerm
    body: "RFormula"


RFormula = RAtom | RFalse | RNot | RBin | RQuant | RGuard


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else Token("", "", 1, 1)
            raise ParseError("unexpected end of input", last.line, last.col)
        self.pos += 1
        return tok

    def accept(self, kind: str) -> Token | None:
        tok = self.peek()
        if tok is not None and tok.kind == kind:
            self.pos += 1
            return tok
        return None

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            got = tok.text if tok else "end of input"
            where = tok if tok else (self.tokens[-1] if self.tokens else Token("", "", 1, 1))
            raise ParseError(f"expected {what}, got {got!r}", where.line, where.col)
        self.pos += 1
        return tok

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "kw" and tok.text == word

    # formula level ---------------------------------------------------------

    def formula(self) -> RFormula:
        tok = self.peek()
        if tok is not None and tok.kind == "kw" and tok.text in ("forall", "exists"):
            self.next()
            binders: list[Binder] = []
            while True:
                name = self.expect("name", "a variable name")
                binders.append(Binder(name.text, name.line, name.col, tok.text))
                nxt = self.peek()
                if nxt is not None and nxt.kind == "name":
                    continue
                break
            self.expect(".", "'.' after quantified variables")
            body = self.formula()
            for b in reversed(binders):
                body = RQuant(b, body)
            return body

        guard = self.try_guard()
        if guard is not None:
            return guard
        return self.impl()

    def try_guard(self) -> RGuard | None:
        saved = self.pos
        try:
            lhs = self.term()
            if self.accept("=") is None:
                self.pos = saved
                return None
            rhs = self.term()
            tok = self.peek()
            if self.accept("->") is None:
                where = tok if tok else self.tokens[-1]
                raise ParseError(
                    "an equation is not a formula; 't = u' must guard one as 't = u -> F'",
                    where.line,
                    where.col,
                )
            body = self.formula()
            return RGuard(lhs, rhs, body)
        except ParseError:
            if self.pos > saved and any(
                t.kind == "=" for t in self.tokens[saved : self.pos]
            ):
                raise  # it really was an equation; report the guard error
            self.pos = saved
            return None

    def impl(self) -> RFormula:
        items = [self.iff()]
        while self.accept(","):
            items.append(self.iff())
        if self.accept("->"):
            out = self.formula()
            for item in reversed(items):
                out = RBin("implies", item, out)
            return out
        if len(items) > 1:
            tok = self.peek() or self.tokens[-1]
            raise ParseError("premise list needs '->' and a conclusion", tok.line, tok.col)
        return items[0]

    def iff(self) -> RFormula:
        out = self.or_f()
        while True:
            if self.accept("<->"):
                out = RBin("iff", out, self.or_f())
            elif self.at_keyword("xor"):
                self.next()
                out = RBin("xor", out, self.or_f())
            else:
                return out

    def or_f(self) -> RFormula:
        out = self.and_f()
        while True:
            if self.accept("\\/") is not None or self._accept_kw("or"):
                out = RBin("or", out, self.and_f())
            else:
                return out

    def and_f(self) -> RFormula:
        out = self.unary()
        while True:
            if self.accept("/\\") is not None or self._accept_kw("and"):
                out = RBin("and", out, self.unary())
            else:
                return out

    def _accept_kw(self, word: str) -> bool:
        if self.at_keyword(word):
            self.next()
            return True
        return False

    def unary(self) -> RFormula:
        if self.at_keyword("not"):
            self.next()
            return RNot(self.unary())
        return self.atom()

    def atom(self) -> RFormula:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", 0, 0)
        if tok.kind == "kw" and tok.text == "false":
            self.next()
            return RFalse()
        if tok.kind == "(":
            self.next()
            inner = self.formula()
            self.expect(")", "')'")
            return inner
        if tok.kind == "name":
            self.next()
            args: tuple[RTerm, ...] = ()
            if self.peek() is not None and self.peek().kind == "(":
                self.next()
                if self.accept(")"):
                    return RAtom(tok.text, (), tok.line, tok.col, parenthesized_zero=True)
                arglist = [self.term()]
                while self.accept(","):
                    arglist.append(self.term())
                self.expect(")", "')' after arguments")
                args = tuple(arglist)
            return RAtom(tok.text, args, tok.line, tok.col)
        raise ParseError(f"expected a formula, got {tok.text!r}", tok.line, tok.col)

    # term level ------------------------------------------------------------

    def term(self) -> RTerm:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", 0, 0)
        if tok.kind == "nat":
            self.next()
            return RNat(int(tok.text), tok.line, tok.col)
        if tok.kind == "name":
            self.next()
            if self.peek() is not None and self.peek().kind == "(":
                self.next()
                args = [self.term()]
                while self.accept(","):
                    args.append(self.term())
                self.expect(")", "')' after arguments")
                return RApp(tok.text, tuple(args), tok.line, tok.col)
            return RName(tok.text, tok.line, tok.col)
        raise ParseError(f"expected a term, got {tok.text!r}", tok.line, tok.col)


# ---------------------------------------------------------------------------
# name resolution and sort inference

_INT_DEFAULT_INITIALS = set("ijklmn")


def _resolve(raw: RFormula, sig: Signature) -> SurfaceFormula:
    def constrain(binder: Binder, sort: Sort, line: int, col: int) -> None:
        if binder.sort is None:
            binder.sort = sort
        elif binder.sort is not sort:
            raise ParseError(
                f"variable {binder.name} is used at both sorts", line, col
            )

    def term(t: RTerm, expected: Sort, env: dict[str, Binder]) -> Term:
        match t:
            case RNat(v, line, col):
                if expected is not Sort.INT:
                    raise ParseError("integer literal in ack position", line, col)
                return IntLit(v)
            case RName(name, line, col):
                if name in env:
                    constrain(env[name], expected, line, col)
                    return AckVar(name) if expected is Sort.ACK else IntVar(name)
                if name in sig.constants:
                    if expected is not Sort.ACK:
                        raise ParseError(f"constant {name} in int position", line, col)
                    return AckConst(name)
                if name in sig.functions:
                    arity, _ = sig.functions[name]
                    if arity != 0:
                        raise ParseError(f"function {name} expects {arity} arguments", line, col)
                    if expected is not Sort.INT:
                        raise ParseError(f"integer term {name} in ack position", line, col)
                    return FunApp(name, ())
                raise ParseError(f"unresolved name {name}", line, col)
            case RApp(name, args, line, col):
                if expected is not Sort.INT:
                    raise ParseError(f"integer term {name}(...) in ack position", line, col)
                if name not in sig.functions:
                    kind = "a predicate" if name in sig.predicates else "undeclared"
                    raise ParseError(f"{name} is {kind}, not a function", line, col)
                arity, _ = sig.functions[name]
                if len(args) != arity:
                    raise ParseError(f"function {name} expects {arity} arguments", line, col)
                return FunApp(name, tuple(term(a, Sort.INT, env) for a in args))
        raise ParseError(f"bad term {t!r}", 0, 0)

    def go(f: RFormula, env: dict[str, Binder]) -> SurfaceFormula:
        match f:
            case RFalse():
                return Falsum()
            case RAtom(name, args, line, col, _):
                if name not in sig.predicates:
                    if name in env or name in sig.constants:
                        raise ParseError(f"{name} is not a predicate", line, col)
                    raise ParseError(f"undeclared predicate {name}", line, col)
                sorts = sig.predicates[name]
                if len(args) != len(sorts):
                    raise ParseError(
                        f"{name} expects {len(sorts)} arguments, got {len(args)}", line, col
                    )
                return Atom(name, tuple(term(a, s, env) for a, s in zip(args, sorts)))
            case RNot(body):
                return Not(go(body, env))
            case RBin(op, lhs, rhs):
                l, r = go(lhs, env), go(rhs, env)
                match op:
                    case "implies":
                        return Implies(l, r)
                    case "and":
                        return And(l, r)
                    case "or":
                        return Or(l, r)
                    case "iff":
                        return Iff(l, r)
                    case "xor":
                        return Xor(l, r)
            case RGuard(lhs, rhs, body):
                l = term(lhs, Sort.INT, env)
                r = term(rhs, Sort.INT, env)
                return Guard(l, r, go(body, env))
            case RQuant(binder, body):
                saved = env.get(binder.name)
                env[binder.name] = binder
                inner = go(body, env)
                if saved is None:
                    del env[binder.name]
                else:
                    env[binder.name] = saved
                if binder.sort is None:
                    binder.sort = (
                        Sort.INT if binder.name[0].lower() in _INT_DEFAULT_INITIALS else Sort.ACK
                    )
                if binder.kind == "forall":
                    return Forall(binder.name, binder.sort, inner)
                return Exists(binder.name, binder.sort, inner)
        raise ParseError(f"bad formula node {f!r}", 0, 0)

    return go(raw, {})


def parse_formula(src: str, sig: Signature) -> SurfaceFormula:
    """Parse one formula against a signature, sugar intact."""
    tokens = tokenize(src)
    parser = _Parser(tokens)
    raw = parser.formula()
    tok = parser.peek()
    if tok is not None:
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return _resolve(raw, sig)


# ---------------------------------------------------------------------------
# signature parsing

_SORT_WORDS = {"ack": Sort.ACK, "int": Sort.INT}


def parse_signature(src: str) -> Signature:
    """Parse declaration lines into a Signature (0 and s always included)."""
    predicates: dict[str, tuple[Sort, ...]] = {}
    functions: dict[str, tuple[int, object]] = {}
    constants: list[str] = []

    for lineno, rawline in enumerate(src.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "pred":
            m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_']*)\s*:\s*(.+)", rest)
            if not m:
                raise ParseError("expected 'pred NAME : SORTS'", lineno, 1)
            name, sorts_text = m.group(1), m.group(2).strip()
            if sorts_text == "()":
                sorts: tuple[Sort, ...] = ()
            else:
                parts = [p.strip() for p in sorts_text.split("*")]
                if not all(p in _SORT_WORDS for p in parts):
                    raise ParseError(f"unknown sort in {sorts_text!r}", lineno, 1)
                sorts = tuple(_SORT_WORDS[p] for p in parts)
            if name in predicates:
                raise ParseError(f"duplicate predicate {name}", lineno, 1)
            predicates[name] = sorts
        elif head == "fun":
            m = re.fullmatch(
                r"([A-Za-z_][A-Za-z0-9_']*)\s*/\s*(\d+)\s*=\s*([A-Za-z_][A-Za-z0-9_]*)", rest
            )
            if not m:
                raise ParseError("expected 'fun NAME / ARITY = BUILTIN'", lineno, 1)
            name, arity, builtin = m.group(1), int(m.group(2)), m.group(3)
            if builtin not in BUILTIN_EVALUATORS:
                raise ParseError(
                    f"unknown builtin {builtin}; have {', '.join(sorted(BUILTIN_EVALUATORS))}",
                    lineno,
                    1,
                )
            builtin_arity, evaluator = BUILTIN_EVALUATORS[builtin]
            if arity != builtin_arity:
                raise ParseError(f"builtin {builtin} has arity {builtin_arity}", lineno, 1)
            functions[name] = (arity, evaluator)
        elif head == "const":
            names = [n.strip() for n in rest.split(",")]
            for name in names:
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", name):
                    raise ParseError(f"bad constant name {name!r}", lineno, 1)
                constants.append(name)
        else:
            raise ParseError(f"unknown declaration {head!r}", lineno, 1)

    try:
        return Signature.build(predicates=predicates, constants=constants, functions=functions)  # type: ignore[arg-type]
    except FormulaError as exc:
        raise ParseError(str(exc)) from exc


# ---------------------------------------------------------------------------
# .lp files

@dataclass
class LPFile:
    signature: Signature
    formulas: dict[str, SurfaceFormula]
    sources: dict[str, str] = field(default_factory=dict)
    order: list[str] = field(default_factory=list)


def parse_lp(src: str) -> LPFile:
    """One signature block, then one or more 'formula NAME := BODY' entries."""
    sig_lines: list[str] = []
    entries: list[tuple[str, list[str], int]] = []
    current: tuple[str, list[str], int] | None = None

    for lineno, rawline in enumerate(src.splitlines(), start=1):
        stripped = rawline.split("#", 1)[0].rstrip()
        if current is None and not stripped.strip():
            continue
        m = re.match(r"\s*formula\s+([A-Za-z_][A-Za-z0-9_']*)\s*:=\s*(.*)$", stripped)
        if m:
            current = (m.group(1), [m.group(2)], lineno)
            entries.append(current)
        elif current is not None:
            current[1].append(stripped)
        elif stripped.strip():
            sig_lines.append(rawline)

    sig = parse_signature("\n".join(sig_lines))
    out = LPFile(signature=sig, formulas={}, sources={}, order=[])
    for name, body_lines, lineno in entries:
        body = "\n".join(body_lines).strip()
        if not body:
            raise ParseError(f"formula {name} has an empty body", lineno, 1)
        if name in out.formulas:
            raise ParseError(f"duplicate formula name {name}", lineno, 1)
        out.formulas[name] = parse_formula(body, sig)
        out.sources[name] = re.sub(r"\s+", " ", body).strip()
        out.order.append(name)
    return out


def load_lp(path: str) -> LPFile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_lp(fh.read())


# ---------------------------------------------------------------------------
# printing

def print_term(t: Term) -> str:
    match t:
        case AckVar(name) | IntVar(name):
            return name
        case AckConst(name):
            return name
        case IntLit(v):
            return str(v)
        case FunApp(fn, args):
            if not args:
                return fn
            return f"{fn}({', '.join(print_term(a) for a in args)})"
    raise FormulaError(f"not a term: {t!r}")


def _atomic(f: Formula) -> bool:
    return isinstance(f, (Atom, Falsum))


def print_formula(f: Formula) -> str:
    """Render a core formula with minimal parentheses.

    Quantifier bodies are parenthesized unless atomic; the left side of an
    implication is parenthesized unless atomic; chains stay flat on the
    right.  Adjacent binders collapse into one 'forall x y.' group.
    """
    match f:
        case Falsum():
            return "false"
        case Atom(pred, args):
            if not args:
                return pred
            return f"{pred}({', '.join(print_term(a) for a in args)})"
        case Implies(l, r):
            lhs = print_formula(l) if _atomic(l) else f"({print_formula(l)})"
            return f"{lhs} -> {print_formula(r)}"
        case Guard(l, r, b):
            return f"{print_term(l)} = {print_term(r)} -> {print_formula(b)}"
        case Forall(_, _, _):
            names: list[str] = []
            node: Formula = f
            while isinstance(node, Forall):
                names.append(node.var)
                node = node.body
            body = print_formula(node)
            if not _atomic(node):
                body = f"({body})"
            return f"forall {' '.join(names)}. {body}"
    raise FormulaError(f"not a core formula: {f!r}")
