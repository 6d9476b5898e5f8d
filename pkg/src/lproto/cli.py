"""Command line front end.

Exit codes: 0 success, 1 negative verdict (Invalid), 2 usage error,
3 internal error or Unknown verdict.  Verdicts go to stdout; search
statistics and diagnostics go to stderr.

Formula references are ``FILE:NAME``.  FILE resolves against the
filesystem first and then against the bundled protocol files, so
``examples.lp:drinker`` works from anywhere.  Plain catalog names
(``drinker``) are accepted where a single formula is expected.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .compose import compose
from .corpus import CATALOG, load_bundled
from .formulas import FormulaError, Signature, expand_sugar
from .game import (
    IllegalMove,
    Interactive,
    Player,
    StrategyError,
    resolve_move,
    run_play,
)
from .netsim import (
    Annotator,
    LossModel,
    SimulationError,
    annotate,
    scripted_sender,
    simulate,
)
from .normal import normalize
from .solve import Greedy, SearchLimits, VerdictStatus, solve
from .store import SessionStore, signature_decls
from .syntax import LPFile, ParseError, load_lp, print_formula

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3

_BUNDLED_FILES = ("examples.lp", "typed.lp")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INTERNAL):
        super().__init__(message)
        self.code = code


def _load_lp_file(file_spec: str) -> LPFile:
    path = Path(file_spec)
    if path.exists():
        return load_lp(str(path))
    base = path.name
    if base in _BUNDLED_FILES:
        return load_bundled(base)
    raise CliError(f"no such file: {file_spec}")


def _split_ref(ref: str) -> tuple[str, str | None]:
    if ":" in ref:
        file_part, name = ref.rsplit(":", 1)
        return file_part, name
    return ref, None


def _resolve_formula(ref: str):
    """FILE:NAME or bare catalog NAME -> (core formula, signature, entry|None)."""
    file_part, name = _split_ref(ref)
    if name is None:
        entry = next((e for e in CATALOG if e.name == ref), None)
        if entry is None:
            raise CliError(
                f"expected FILE:NAME or a catalog name, got {ref!r}", EXIT_USAGE
            )
        file_part, name = entry.file, entry.name
    lp = _load_lp_file(file_part)
    if name not in lp.formulas:
        have = ", ".join(sorted(lp.formulas)) or "none"
        raise CliError(f"no formula {name!r} in {file_part} (have: {have})")
    core = expand_sugar(lp.formulas[name], lp.signature)
    entry = next(
        (e for e in CATALOG if e.name == name and Path(file_part).name == e.file),
        None,
    )
    return core, lp.signature, entry


def _limits_from_args(args, entry) -> SearchLimits:
    base = entry.search_limits if entry is not None else SearchLimits()
    return SearchLimits(
        max_states=args.max_states if args.max_states is not None else base.max_states,
        max_depth=args.max_depth if args.max_depth is not None else base.max_depth,
        int_bound=args.int_bound if args.int_bound is not None else base.int_bound,
        fresh_bound=args.fresh_bound
        if args.fresh_bound is not None
        else base.fresh_bound,
    )


def _add_limit_flags(sub) -> None:
    sub.add_argument("--max-states", type=int, default=None, metavar="N")
    sub.add_argument("--max-depth", type=int, default=None, metavar="N")
    sub.add_argument("--int-bound", type=int, default=None, metavar="N")
    sub.add_argument("--fresh-bound", type=int, default=None, metavar="N")


def _rate(text: str):
    """A probability or a comma-separated schedule of probabilities."""
    if "," in text:
        return [float(p) for p in text.split(",")]
    return float(text)


# -- subcommands ----------------------------------------------------------


def _cmd_parse(args) -> int:
    lp = _load_lp_file(args.file)
    decls = signature_decls(lp.signature)
    print("signature:")
    for line in decls:
        print(f"  {line}")
    names = lp.order or sorted(lp.formulas)
    print(f"formulas ({len(names)}):")
    for name in names:
        print(f"  {name} := {lp.sources.get(name, '?')}")
    return EXIT_OK


def _cmd_normalize(args) -> int:
    file_part, name = _split_ref(args.ref)
    if name is None:
        lp = _load_lp_file(file_part)
        names = lp.order or sorted(lp.formulas)
        for n in names:
            nf = normalize(expand_sugar(lp.formulas[n], lp.signature))
            print(f"{n}: {print_formula(nf.to_formula())}")
        return EXIT_OK
    core, sig, _ = _resolve_formula(args.ref)
    nf = normalize(core)
    print(print_formula(nf.to_formula()))
    return EXIT_OK


def _cmd_check(args) -> int:
    core, sig, entry = _resolve_formula(args.ref)
    limits = _limits_from_args(args, entry)
    root = normalize(core)

    store = None
    store_dir = os.environ.get("LPROTO_STORE")
    if store_dir:
        store = SessionStore(store_dir)
        cached = store.cached_verdict(root, limits)
        if cached is not None:
            print(cached["status"])
            print(
                f"cached verdict from {cached['at']} "
                f"(states={cached['states']}, elapsed={cached['elapsed']:.3f}s)",
                file=sys.stderr,
            )
            return _verdict_exit(cached["status"])

    verdict = solve(root, sig, limits)
    print(verdict.status.value)
    stats = verdict.stats
    line = (
        f"states={stats.states} edges={stats.edges} "
        f"max_depth={stats.max_depth_seen} elapsed={stats.elapsed:.3f}s"
    )
    if verdict.limit_hit:
        line += f" limit_hit={verdict.limit_hit}"
    print(line, file=sys.stderr)
    if store is not None:
        store.cache_verdict(root, limits, verdict)
    return _verdict_exit(verdict.status.value)


def _verdict_exit(status: str) -> int:
    if status == VerdictStatus.VALID.value:
        return EXIT_OK
    if status == VerdictStatus.INVALID.value:
        return EXIT_INVALID
    return EXIT_INTERNAL


def _merge_signatures(a: Signature, b: Signature) -> Signature:
    preds = dict(a.predicates)
    for name, sorts in b.predicates.items():
        if name in preds and preds[name] != sorts:
            raise CliError(f"predicate {name} declared with different sorts")
        preds[name] = sorts
    funcs = dict(a.functions)
    for name, spec in b.functions.items():
        if name in funcs and funcs[name] != spec:
            raise CliError(f"function {name} declared differently")
        funcs[name] = spec
    preds.pop("0", None)
    preds.pop("s", None)
    funcs = {n: spec for n, spec in funcs.items() if n not in ("0", "s")}
    return Signature.build(
        predicates=preds,
        constants=sorted(a.constants | b.constants),
        functions=funcs,
    )


def _cmd_compose(args) -> int:
    outer, sig_outer, _ = _resolve_formula(args.outer)
    inner, sig_inner, _ = _resolve_formula(args.inner)
    sig = _merge_signatures(sig_outer, sig_inner)
    composed = compose(normalize(outer), normalize(inner))
    nf = normalize(composed)
    print(print_formula(nf.to_formula()))
    if args.check:
        verdict = solve(nf, sig, _limits_from_args(args, None))
        print(verdict.status.value)
        return _verdict_exit(verdict.status.value)
    return EXIT_OK


def _interactive_chooser(annotator_box):
    def choose(state, options):
        annotator = annotator_box[0]
        who = "opponent" if state.turn is Player.OPPONENT else "player"
        print(f"\n[{who} to move]", file=sys.stderr)
        for i, move in enumerate(options):
            note = ""
            if annotator is not None:
                note = f"  ({annotator.classify(state.turn, move).describe()})"
            print(f"  {i}: {move.describe()}{note}", file=sys.stderr)
        while True:
            try:
                raw = input("move number> ").strip()
            except EOFError:
                raise IllegalMove("input closed")
            if raw.isdigit() and int(raw) < len(options):
                return options[int(raw)]
            print(f"enter a number 0..{len(options) - 1}", file=sys.stderr)

    return choose


class _ScriptFile:
    """Moves from a JSONL file: {"formula": printed text, "values": [...]}."""

    def __init__(self, path: str):
        with open(path, encoding="utf-8") as fh:
            self.records = [
                json.loads(line) for line in fh if line.strip()
            ]
        self.index = 0

    def choose(self, state):
        if self.index >= len(self.records):
            raise IllegalMove("script exhausted")
        record = self.records[self.index]
        self.index += 1
        return resolve_move(state, record["formula"], record.get("values", []))


def _cmd_play(args) -> int:
    core, sig, entry = _resolve_formula(args.ref)
    limits = _limits_from_args(args, entry)
    root = normalize(core)
    policy = limits.policy()
    annotator_box = [Annotator(sig, root)]

    def build(side: Player, spec: str):
        if spec == "greedy":
            return Greedy(side, limits)
        if spec == "interactive":
            return Interactive(_interactive_chooser(annotator_box), policy)
        if spec == "scripted" and side is Player.OPPONENT:
            return scripted_sender(policy, sig, annotator_box[0])
        if spec.startswith("scripted:"):
            return _ScriptFile(spec.split(":", 1)[1])
        raise CliError(f"unknown strategy {spec!r} for {side.value}", EXIT_USAGE)

    player = build(Player.PLAYER, args.player)
    opponent = build(Player.OPPONENT, args.opponent)
    try:
        transcript = run_play(root, sig, player, opponent, budget=args.budget, policy=policy)
    except StrategyError as exc:
        print(exc.transcript.to_table())
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    print(transcript.to_table())
    trace = annotate(transcript)
    print()
    print(trace.to_timeline())
    return EXIT_OK


def _cmd_simulate(args) -> int:
    core, sig, entry = _resolve_formula(args.formula)
    limits = _limits_from_args(args, entry)
    model = LossModel(
        ack_loss=args.ack_loss,
        close_request=args.close_request,
        reinit=args.reinit,
        seed=args.seed,
    )
    try:
        trace = simulate(
            normalize(core),
            sig,
            model,
            budget=args.steps,
            limits=limits,
            int_choice=args.int_choice,
        )
    except SimulationError as exc:
        print(f"{exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.json:
        print(json.dumps(trace.to_records(), indent=2))
    else:
        print(trace.to_timeline())
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import serve_forever

    store_dir = args.store or os.environ.get("LPROTO_STORE") or "./lproto-store"
    print(
        f"serving on http://{args.host}:{args.port} (store: {store_dir})",
        file=sys.stderr,
    )
    try:
        serve_forever(store_dir, host=args.host, port=args.port, ui_dir=args.ui)
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lproto",
        description="Protocol engine: formulas as network protocols, plays as sessions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a .lp file and list its contents")
    p.add_argument("file")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("normalize", help="print the normal form of FILE[:NAME]")
    p.add_argument("ref")
    p.set_defaults(func=_cmd_normalize)

    p = sub.add_parser("check", help="decide FILE:NAME by bounded search")
    p.add_argument("ref")
    _add_limit_flags(p)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("compose", help="graft FILE:N2 in front of FILE:N1's final packets")
    p.add_argument("outer")
    p.add_argument("inner")
    p.add_argument("--check", action="store_true", help="also solve the composition")
    _add_limit_flags(p)
    p.set_defaults(func=_cmd_compose)

    p = sub.add_parser("play", help="drive one full play of FILE:NAME")
    p.add_argument("ref")
    p.add_argument("--player", default="greedy", metavar="greedy|interactive")
    p.add_argument(
        "--opponent", default="scripted", metavar="scripted|scripted:FILE|greedy|interactive"
    )
    p.add_argument("--budget", type=int, default=200, metavar="N")
    _add_limit_flags(p)
    p.set_defaults(func=_cmd_play)

    p = sub.add_parser("simulate", help="run a lossy network session over FILE:NAME")
    p.add_argument("--formula", required=True, metavar="FILE:NAME")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--ack-loss", type=_rate, default=0.0, metavar="P[,P...]")
    p.add_argument("--close-request", type=_rate, default=0.0, metavar="P[,P...]")
    p.add_argument("--reinit", type=_rate, default=0.0, metavar="P[,P...]")
    p.add_argument("--steps", type=int, default=200, metavar="N")
    p.add_argument("--int-choice", type=int, default=None, metavar="N")
    p.add_argument("--json", action="store_true", help="emit structured records")
    _add_limit_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8177)
    p.add_argument("--store", default=None, metavar="DIR")
    p.add_argument("--ui", default=None, metavar="DIR", help="static files to serve")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ParseError, FormulaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
