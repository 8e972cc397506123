"""Command-line interface.

Subcommands: `match`, `covers`, `intersects`, `simulate`.  Relation
subcommands print a single verdict token and exit 0 when the relation holds,
1 when it does not, 2 on usage or input errors.  `simulate --verify` exits 0
on PASS, 3 on FAIL, 4 on MAPPING_GAP; load errors exit 2.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from .knowledge import KnowledgeBase, KnowledgeError, load_knowledge
from .model import (
    ParseError,
    parse_advertisement,
    parse_event,
    parse_subscription,
    render,
    render_pair,
)
from .routing import RoutingMode
from .semantic import (
    _augmented,
    _normalized_sub,
    sem_covers,
    sem_intersects,
    sem_match,
)
from .sim import (
    ScenarioError,
    Verdict,
    load_scenario,
    random_scenario_document,
    run,
    verify,
)
from .syntactic import covers, intersects, match_event, match_pair

EXIT_TRUE = 0
EXIT_FALSE = 1
EXIT_ERROR = 2
EXIT_FAIL = 3
EXIT_MAPPING_GAP = 4


class CliError(Exception):
    """Input or usage problem; maps to exit code 2."""


def _add_relation_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--knowledge", metavar="PATH", help="knowledge JSON file")
    parser.add_argument(
        "--mode",
        choices=["syntactic", "semantic"],
        default="syntactic",
        help="relation set to apply (default: syntactic)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semroute",
        description="Content-based publish/subscribe matching and simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("match", help="match an event against a subscription")
    p.add_argument("event")
    p.add_argument("subscription")
    _add_relation_flags(p)
    p.add_argument(
        "--explain",
        action="store_true",
        help="show normalized forms, added pairs, and witnesses",
    )

    p = sub.add_parser("covers", help="test whether one subscription covers another")
    p.add_argument("sub1")
    p.add_argument("sub2")
    _add_relation_flags(p)

    p = sub.add_parser(
        "intersects", help="test whether an advertisement intersects a subscription"
    )
    p.add_argument("advertisement")
    p.add_argument("subscription")
    _add_relation_flags(p)

    p = sub.add_parser("simulate", help="run a scenario through the broker overlay")
    p.add_argument("scenario", nargs="?", help="scenario JSON file")
    p.add_argument("--random", action="store_true", help="generate a scenario instead")
    p.add_argument("--seed", type=int, default=0, help="seed for --random")
    p.add_argument(
        "--mode",
        choices=["syntactic", "semantic"],
        help="override the scenario's declared mode",
    )
    p.add_argument("--verify", action="store_true", help="grade against the oracle")
    p.add_argument("--report", metavar="PATH", help="write the JSON report here")
    return parser


def _load_kb(args) -> KnowledgeBase:
    if args.mode == "semantic":
        if not args.knowledge:
            raise CliError("semantic mode requires --knowledge")
        try:
            return load_knowledge(Path(args.knowledge).read_bytes())
        except OSError as err:
            raise CliError(f"cannot read knowledge file: {err}") from None
        except KnowledgeError as err:
            raise CliError(str(err)) from None
    return KnowledgeBase.empty()


def _explain_match(event, sub, kb, semantic: bool) -> None:
    if semantic:
        augmented = _augmented(event, kb)
        n_sub = _normalized_sub(sub, kb)
        print(f"normalized event: {render(augmented.base)}")
        print(f"normalized subscription: {render(n_sub)}")
        print("added pairs:")
        if not augmented.added:
            print("  (none)")
        for ap in augmented.added:
            print(f"  {render_pair(ap.pair)}  [{ap.provenance.value}]")
        pairs = augmented.all_pairs()
        predicates = n_sub.predicates
    else:
        pairs = event.pairs
        predicates = sub.predicates
    print("predicates:")
    for pred in predicates:
        witness = next((p for p in pairs if match_pair(p, pred)), None)
        shown = render_pair(witness) if witness else "no matching pair"
        text = render(type(sub)((pred,)))
        print(f"  {text}  <-  {shown}")


def _cmd_match(args) -> int:
    kb = _load_kb(args)
    event = parse_event(args.event)
    sub = parse_subscription(args.subscription)
    if args.mode == "semantic":
        result = sem_match(event, sub, kb)
    else:
        result = match_event(event, sub)
    if args.explain:
        _explain_match(event, sub, kb, args.mode == "semantic")
    print("match" if result else "no-match")
    return EXIT_TRUE if result else EXIT_FALSE


def _cmd_covers(args) -> int:
    kb = _load_kb(args)
    s1 = parse_subscription(args.sub1)
    s2 = parse_subscription(args.sub2)
    if args.mode == "semantic":
        result = sem_covers(s1, s2, kb)
    else:
        result = covers(s1, s2)
    print("covers" if result else "not-covers")
    return EXIT_TRUE if result else EXIT_FALSE


def _cmd_intersects(args) -> int:
    kb = _load_kb(args)
    adv = parse_advertisement(args.advertisement)
    sub = parse_subscription(args.subscription)
    if args.mode == "semantic":
        result = sem_intersects(adv, sub, kb)
    else:
        result = intersects(adv, sub)
    print("intersects" if result else "not-intersects")
    return EXIT_TRUE if result else EXIT_FALSE


def _cmd_simulate(args) -> int:
    if args.random:
        scenario = load_scenario(random_scenario_document(args.seed))
    else:
        if not args.scenario:
            raise CliError("a scenario file (or --random) is required")
        path = Path(args.scenario)
        try:
            raw = path.read_bytes()
        except OSError as err:
            raise CliError(f"cannot read scenario: {err}") from None
        scenario = load_scenario(raw, base_dir=path.parent)
    if args.mode:
        scenario = scenario.with_mode(RoutingMode(args.mode))

    report = verify(scenario) if args.verify else run(scenario)
    if args.report:
        Path(args.report).write_text(report.to_json())
    sys.stdout.write(report.to_table())
    if not args.verify:
        return EXIT_TRUE
    if report.verdict == Verdict.PASS.value:
        return EXIT_TRUE
    if report.verdict == Verdict.MAPPING_GAP.value:
        return EXIT_MAPPING_GAP
    return EXIT_FAIL


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        # argparse exits 2 on usage errors and 0 on --help; pass both through.
        return int(err.code or 0)
    handlers = {
        "match": _cmd_match,
        "covers": _cmd_covers,
        "intersects": _cmd_intersects,
        "simulate": _cmd_simulate,
    }
    try:
        return handlers[args.command](args)
    except (CliError, ParseError, KnowledgeError, ScenarioError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
