"""Bundled formula catalog.

Two .lp files ship with the package: examples.lp (single-sorted) and
typed.lp (integer-indexed).  The catalog pairs each named formula with a
one-line protocol reading, the verdict the bounded solver is expected to
reach under the listed limits, and whether the formula is meant to be
checked per integer instance rather than in one search.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .formulas import Formula, FormulaError, Signature, expand_sugar
from .solve import SearchLimits
from .syntax import LPFile, parse_lp

DATA_FILES = ("examples.lp", "typed.lp")


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    file: str
    description: str
    expected: str | None = None  # "Valid" | "Invalid" | None (not part of the suite)
    omega: bool = False  # check per integer instance
    limits: SearchLimits | None = None  # None = solver defaults

    @property
    def search_limits(self) -> SearchLimits:
        return self.limits if self.limits is not None else SearchLimits()


_SWAP_LIMITS = SearchLimits(fresh_bound=2)
_TYPED_LIMITS = SearchLimits(fresh_bound=2)
_ACKED_LIMITS = SearchLimits(int_bound=2, fresh_bound=2)

CATALOG: tuple[CorpusEntry, ...] = (
    CorpusEntry("p_implies_p", "examples.lp", "one packet handed over and handed back", "Valid"),
    CorpusEntry("p_implies_q", "examples.lp", "promises a Q packet for a P packet with no way to produce one", "Invalid"),
    CorpusEntry("p_alone", "examples.lp", "a bare send with nothing to answer", "Invalid"),
    CorpusEntry("q_discharge", "examples.lp", "an idle Q service that answers itself unlocks the P packet", "Valid"),
    CorpusEntry("peirce", "examples.lp", "commit to a fallback sender and receive the packet either way", "Valid"),
    CorpusEntry("s_implies_s", "examples.lp", "flag-level echo, no payload address", "Valid"),
    CorpusEntry("s_or_not_s", "examples.lp", "the flag is either up or down", "Valid"),
    CorpusEntry("modus_ponens", "examples.lp", "a stored converter turns a P packet into a Q packet", "Valid"),
    CorpusEntry("drinker", "examples.lp", "single-packet session: offer a header, then serve every address", "Valid"),
    CorpusEntry("ex4", "examples.lp", "if every address holds the packet, any queried address does", "Valid"),
    CorpusEntry("two_packet", "examples.lp", "two packets in sequence, the second after the first is acknowledged", "Valid", limits=SearchLimits(fresh_bound=2)),
    CorpusEntry("quantifier_swap", "examples.lp", "claims one header fits every peer after each peer picked its own", "Invalid", limits=_SWAP_LIMITS),
    CorpusEntry("n_packet", "typed.lp", "count-prefixed stream: announce n, then deliver n acknowledged packets", "Valid", omega=True, limits=_TYPED_LIMITS),
    CorpusEntry("n_packet_acked", "typed.lp", "count-prefixed stream whose count travels under its own handshake", None, omega=True, limits=_ACKED_LIMITS),
    CorpusEntry("simpler_acked", "typed.lp", "acknowledged-count stream in single-handshake form", None, omega=True, limits=_ACKED_LIMITS),
    CorpusEntry("zero_guard", "typed.lp", "a guard no opening choice can satisfy", "Valid"),
    CorpusEntry("succ_of_zero", "typed.lp", "a guard the sender satisfies forever by answering zero", "Invalid"),
    CorpusEntry("u_everywhere", "typed.lp", "the bare delivery claim with no machinery behind it", "Invalid"),
)

_BY_NAME = {entry.name: entry for entry in CATALOG}


@lru_cache(maxsize=None)
def load_bundled(filename: str) -> LPFile:
    if filename not in DATA_FILES:
        raise FormulaError(f"no bundled file {filename}; have {', '.join(DATA_FILES)}")
    text = resources.files("lproto").joinpath("data").joinpath(filename).read_text(encoding="utf-8")
    return parse_lp(text)


def entry(name: str) -> CorpusEntry:
    if name not in _BY_NAME:
        raise FormulaError(f"no catalog formula named {name}")
    return _BY_NAME[name]


def get(name: str) -> tuple[Formula, Signature, CorpusEntry]:
    """Catalog formula by name: sugar-free core formula plus its signature."""
    ent = entry(name)
    lp = load_bundled(ent.file)
    surface = lp.formulas[ent.name]
    return expand_sugar(surface, lp.signature), lp.signature, ent


def catalog_json() -> list[dict]:
    out = []
    for ent in CATALOG:
        lp = load_bundled(ent.file)
        out.append(
            {
                "name": ent.name,
                "file": ent.file,
                "description": ent.description,
                "source": lp.sources[ent.name],
                "expected": ent.expected,
                "omega": ent.omega,
            }
        )
    return out
