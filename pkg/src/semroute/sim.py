"""Deterministic scenario-driven simulation of the broker overlay.

A scenario file is a JSON object:

    {
      "brokers": ["b1", "b2"],
      "edges": [["b1", "b2"]],
      "clients": [{"id": "pub", "broker": "b1"}],
      "knowledge": "kb.json",          // path, inline object, or omitted
      "mode": "semantic",
      "seed": 7,                       // optional, echoed into the report
      "script": [
        {"action": "advertise", "client": "pub", "payload": "(x = 1)"},
        {"action": "subscribe", "client": "sub", "payload": "(x = 1)"},
        {"action": "publish", "client": "pub", "payload": "{(x, 1)}"}
      ]
    }

Script payloads use the entity text grammar.  The loader checks that the
edges form a tree, that every reference resolves, and that each publish is
preceded by an advertisement from the same client that admits the event
under the scenario's mode.

`run` executes the script with logical time only: each action's message
cascade runs to quiescence before the next action starts, breadth-first by
hop with ties broken by destination then source id, so reports are
byte-reproducible.  `verify` compares the run's deliveries against a
centralized matcher that ignores topology; a deficit explainable only by
mapping-dependent subscriptions (which relation-based forwarding cannot
anticipate) is reported as MAPPING_GAP rather than FAIL.
"""

from __future__ import annotations

import enum
import json
import random
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Union

from .knowledge import KnowledgeBase, KnowledgeError, load_knowledge
from .model import (
    Advertisement,
    Event,
    ParseError,
    Subscription,
    parse_advertisement,
    parse_event,
    parse_subscription,
)
from .routing import (
    BrokerState,
    Message,
    MessageKind,
    RoutingMode,
    handle_message,
)
from .semantic import sem_determines, sem_match
from .syntactic import determines, match_event


class ScenarioError(ValueError):
    """Raised for scenario documents that fail validation."""


class Verdict(enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    MAPPING_GAP = "MAPPING_GAP"


@dataclass(frozen=True)
class ScriptAction:
    kind: MessageKind
    client: str
    payload: Union[Advertisement, Subscription, Event]
    # Position among the script's publish actions; None for other kinds.
    index: Optional[int] = None


@dataclass(frozen=True)
class Scenario:
    brokers: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    clients: tuple[tuple[str, str], ...]
    kb: KnowledgeBase
    mode: RoutingMode
    script: tuple[ScriptAction, ...]
    seed: Optional[int] = None

    def with_mode(self, mode: RoutingMode) -> "Scenario":
        """Same scenario under another relation set.

        Load-time validation ran under the declared mode; switching modes
        here re-checks nothing, so a scenario valid only semantically can
        still be inspected syntactically.
        """
        return replace(self, mode=mode)

    def home_broker(self, client: str) -> str:
        for cid, broker in self.clients:
            if cid == client:
                return broker
        raise ScenarioError(f"unknown client {client!r}")

    def published_events(self) -> tuple[Event, ...]:
        return tuple(
            a.payload for a in self.script if a.kind is MessageKind.PUBLISH
        )


@dataclass(frozen=True)
class SimReport:
    mode: str
    seed: Optional[int]
    deliveries: tuple[tuple[str, int], ...]
    counts: dict
    suppressed_subscriptions: int
    gated_subscriptions: int
    verdict: str = "UNVERIFIED"
    missing: tuple[tuple[str, int], ...] = ()
    spurious: tuple[tuple[str, int], ...] = ()

    def to_json(self) -> str:
        doc = {
            "mode": self.mode,
            "seed": self.seed,
            "deliveries": [list(d) for d in self.deliveries],
            "counts": self.counts,
            "suppressed_subscriptions": self.suppressed_subscriptions,
            "gated_subscriptions": self.gated_subscriptions,
            "verdict": self.verdict,
            "diffs": {
                "missing": [list(d) for d in self.missing],
                "spurious": [list(d) for d in self.spurious],
            },
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def to_table(self) -> str:
        lines = [
            f"mode        {self.mode}",
            f"verdict     {self.verdict}",
            f"deliveries  {len(self.deliveries)}",
            f"suppressed  {self.suppressed_subscriptions}",
            f"gated       {self.gated_subscriptions}",
        ]
        for kind in sorted(self.counts):
            total = sum(self.counts[kind].values())
            lines.append(f"{kind.lower():<11} {total}")
        for client, idx in self.deliveries:
            lines.append(f"notify      {client} event {idx}")
        return "\n".join(lines) + "\n"


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ScenarioError(message)


def _check_tree(brokers: tuple[str, ...], edges: tuple[tuple[str, str], ...]) -> None:
    _require(len(edges) == len(brokers) - 1, "edges must form a tree")
    adjacency: dict[str, list[str]] = {b: [] for b in brokers}
    for a, b in edges:
        _require(a in adjacency and b in adjacency, f"edge ({a}, {b}) off the broker set")
        _require(a != b, f"self-edge on {a!r}")
        adjacency[a].append(b)
        adjacency[b].append(a)
    seen = {brokers[0]}
    frontier = [brokers[0]]
    while frontier:
        node = frontier.pop()
        for peer in adjacency[node]:
            if peer not in seen:
                seen.add(peer)
                frontier.append(peer)
    _require(len(seen) == len(brokers), "topology is not connected")


def load_scenario(
    document: Union[bytes, str, dict], base_dir: Optional[Path] = None
) -> Scenario:
    """Parse and validate a scenario document.

    `base_dir` anchors a relative knowledge path; inline knowledge objects
    need no anchor.
    """
    if isinstance(document, (bytes, str)):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as err:
            raise ScenarioError(f"invalid JSON: {err}") from None
    else:
        data = document
    _require(isinstance(data, dict), "scenario must be a JSON object")
    known = {"brokers", "edges", "clients", "knowledge", "mode", "seed", "script"}
    unknown = set(data) - known
    _require(not unknown, f"unknown keys: {sorted(unknown)}")

    brokers = tuple(data.get("brokers", ()))
    _require(len(brokers) > 0, "at least one broker required")
    _require(
        all(isinstance(b, str) and b for b in brokers), "broker ids must be strings"
    )
    _require(len(set(brokers)) == len(brokers), "duplicate broker id")

    raw_edges = data.get("edges", [])
    _require(
        all(isinstance(e, list) and len(e) == 2 for e in raw_edges),
        "edges must be pairs",
    )
    edges = tuple((str(a), str(b)) for a, b in raw_edges)
    _check_tree(brokers, edges)

    clients = []
    for raw in data.get("clients", []):
        _require(
            isinstance(raw, dict) and "id" in raw and "broker" in raw,
            "clients need id and broker",
        )
        cid, broker = str(raw["id"]), str(raw["broker"])
        _require(broker in brokers, f"client {cid!r} on unknown broker {broker!r}")
        _require(cid not in brokers, f"client id {cid!r} collides with a broker")
        clients.append((cid, broker))
    client_ids = [c for c, _ in clients]
    _require(len(set(client_ids)) == len(client_ids), "duplicate client id")

    knowledge = data.get("knowledge")
    if knowledge is None:
        kb = KnowledgeBase.empty()
    elif isinstance(knowledge, str):
        path = Path(knowledge)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        try:
            kb = load_knowledge(path.read_bytes())
        except OSError as err:
            raise ScenarioError(f"cannot read knowledge file: {err}") from None
        except KnowledgeError as err:
            raise ScenarioError(f"bad knowledge document: {err}") from None
    elif isinstance(knowledge, dict):
        try:
            kb = load_knowledge(knowledge)
        except KnowledgeError as err:
            raise ScenarioError(f"bad knowledge document: {err}") from None
    else:
        raise ScenarioError("knowledge must be a path or an object")

    mode_text = data.get("mode", "syntactic")
    try:
        mode = RoutingMode(mode_text)
    except ValueError:
        raise ScenarioError(f"unknown mode {mode_text!r}") from None

    seed = data.get("seed")
    if seed is not None:
        _require(
            isinstance(seed, int) and not isinstance(seed, bool), "seed must be an integer"
        )

    parsers = {
        "advertise": (MessageKind.ADVERTISE, parse_advertisement),
        "subscribe": (MessageKind.SUBSCRIBE, parse_subscription),
        "publish": (MessageKind.PUBLISH, parse_event),
    }
    script: list[ScriptAction] = []
    publish_count = 0
    advertised: dict[str, list[Advertisement]] = {c: [] for c in client_ids}
    for i, raw in enumerate(data.get("script", [])):
        where = f"script[{i}]"
        _require(
            isinstance(raw, dict)
            and {"action", "client", "payload"} <= set(raw),
            f"{where}: need action, client, payload",
        )
        action = raw["action"]
        _require(action in parsers, f"{where}: unknown action {action!r}")
        client = str(raw["client"])
        _require(client in advertised, f"{where}: unknown client {client!r}")
        kind, parser = parsers[action]
        try:
            payload = parser(str(raw["payload"]))
        except ParseError as err:
            raise ScenarioError(f"{where}: {err}") from None
        index = None
        if kind is MessageKind.PUBLISH:
            admitted = any(
                determines(adv, payload)
                if mode is RoutingMode.SYNTACTIC
                else sem_determines(adv, payload, kb)
                for adv in advertised[client]
            )
            _require(
                admitted,
                f"{where}: publish by {client!r} not admitted by any of its"
                " prior advertisements",
            )
            index = publish_count
            publish_count += 1
        elif kind is MessageKind.ADVERTISE:
            advertised[client].append(payload)
        script.append(ScriptAction(kind, client, payload, index))

    return Scenario(
        brokers=brokers,
        edges=edges,
        clients=tuple(clients),
        kb=kb,
        mode=mode,
        script=tuple(script),
        seed=seed,
    )


def _initial_states(
    scenario: Scenario, covering_suppression: bool, advertisement_gating: bool
) -> dict[str, BrokerState]:
    neighbors: dict[str, list[str]] = {b: [] for b in scenario.brokers}
    for a, b in scenario.edges:
        neighbors[a].append(b)
        neighbors[b].append(a)
    homed: dict[str, list[str]] = {b: [] for b in scenario.brokers}
    for cid, broker in scenario.clients:
        homed[broker].append(cid)
    return {
        b: BrokerState(
            id=b,
            neighbors=tuple(sorted(neighbors[b])),
            clients=tuple(sorted(homed[b])),
            kb=scenario.kb,
            mode=scenario.mode,
            covering_suppression=covering_suppression,
            advertisement_gating=advertisement_gating,
        )
        for b in scenario.brokers
    }


def run(
    scenario: Scenario,
    covering_suppression: bool = True,
    advertisement_gating: bool = True,
) -> SimReport:
    """Execute the script and collect deliveries and per-link traffic."""
    states = _initial_states(scenario, covering_suppression, advertisement_gating)
    counts: dict[str, Counter] = {kind.value: Counter() for kind in MessageKind}
    deliveries: set[tuple[str, int]] = set()

    for action in scenario.script:
        first = Message(
            action.kind,
            action.payload,
            frm=action.client,
            to=scenario.home_broker(action.client),
            index=action.index,
        )
        counts[first.kind.value][f"{first.frm}->{first.to}"] += 1
        frontier = [first]
        while frontier:
            next_frontier: list[Message] = []
            for msg in sorted(
                frontier, key=lambda m: (m.to, m.frm, m.kind.value)
            ):
                if msg.kind is MessageKind.NOTIFY:
                    deliveries.add((msg.to, msg.index))
                    continue
                state, out = handle_message(states[msg.to], msg)
                states[msg.to] = state
                for o in out:
                    counts[o.kind.value][f"{o.frm}->{o.to}"] += 1
                next_frontier.extend(out)
            frontier = next_frontier

    return SimReport(
        mode=scenario.mode.value,
        seed=scenario.seed,
        deliveries=tuple(sorted(deliveries)),
        counts={
            kind: dict(sorted(counter.items()))
            for kind, counter in counts.items()
            if counter
        },
        suppressed_subscriptions=sum(s.suppressed for s in states.values()),
        gated_subscriptions=sum(s.gated for s in states.values()),
    )


def _mode_match(scenario: Scenario, event: Event, sub: Subscription) -> bool:
    if scenario.mode is RoutingMode.SEMANTIC:
        return sem_match(event, sub, scenario.kb)
    return match_event(event, sub)


def oracle_deliveries(scenario: Scenario) -> set[tuple[str, int]]:
    """Reference delivery set from a single matcher holding every subscription.

    Topology-free: a published event is due at every client whose earlier
    subscription matches under the scenario's mode.
    """
    active: list[tuple[str, Subscription]] = []
    expected: set[tuple[str, int]] = set()
    for action in scenario.script:
        if action.kind is MessageKind.SUBSCRIBE:
            active.append((action.client, action.payload))
        elif action.kind is MessageKind.PUBLISH:
            for client, sub in active:
                if _mode_match(scenario, action.payload, sub):
                    expected.add((client, action.index))
    return expected


def _mapping_explains(
    scenario: Scenario, client: str, index: int
) -> bool:
    """True iff the missed delivery hinges entirely on mapping functions.

    Every subscription of the client that matches the event must stop
    matching once mappings are removed; then no relation-driven forwarding
    decision could have routed the event, which is the documented blind spot
    rather than a routing defect.
    """
    if scenario.mode is not RoutingMode.SEMANTIC or not scenario.kb.mappings:
        return False
    bare = scenario.kb.without_mappings()
    event = None
    active: list[Subscription] = []
    for action in scenario.script:
        if action.kind is MessageKind.SUBSCRIBE and action.client == client:
            active.append(action.payload)
        elif action.kind is MessageKind.PUBLISH and action.index == index:
            event = action.payload
            break
    assert event is not None
    matching = [s for s in active if sem_match(event, s, scenario.kb)]
    return bool(matching) and all(
        not sem_match(event, s, bare) for s in matching
    )


def verify(
    scenario: Scenario,
    covering_suppression: bool = True,
    advertisement_gating: bool = True,
) -> SimReport:
    """Run the scenario and grade its deliveries against the oracle."""
    report = run(scenario, covering_suppression, advertisement_gating)
    expected = oracle_deliveries(scenario)
    got = set(report.deliveries)
    missing = tuple(sorted(expected - got))
    spurious = tuple(sorted(got - expected))
    if not missing and not spurious:
        verdict = Verdict.PASS
    elif not spurious and all(
        _mapping_explains(scenario, client, index) for client, index in missing
    ):
        verdict = Verdict.MAPPING_GAP
    else:
        verdict = Verdict.FAIL
    return replace(
        report, verdict=verdict.value, missing=missing, spurious=spurious
    )


_INT_ATTRS = ("price", "size", "grade")


def random_scenario_document(seed: int) -> dict:
    """Generate a self-contained, mapping-free scenario document.

    The generator keeps every scenario inside the completeness envelope of
    the routing design: all advertisements precede subscriptions and
    publishes (stored subscriptions are not re-forwarded when a new
    advertisement arrives), advertisements admit every event their client
    later publishes, and inequality predicates use integers only (an
    inequality over a synonym of the compared term can be satisfied
    syntactically yet fail after normalization, which would put the two
    modes' delivery sets out of the documented containment order).
    """
    rng = random.Random(seed)

    n_brokers = rng.randint(2, 10)
    brokers = [f"b{i}" for i in range(1, n_brokers + 1)]
    edges = [
        [brokers[rng.randrange(i)], brokers[i]] for i in range(1, n_brokers)
    ]

    n_terms = rng.randint(8, 40)
    terms = [f"t{i}" for i in range(1, n_terms + 1)]
    hierarchy = []
    for i, term in enumerate(terms):
        if i > 0 and rng.random() < 0.6:
            hierarchy.append({"child": term, "parent": terms[rng.randrange(i)]})
    synonyms = []
    alias_of: dict[str, list[str]] = {}
    for term in rng.sample(terms, k=max(1, n_terms // 4)):
        members = [f"{term}x", f"{term}y"][: rng.randint(1, 2)]
        synonyms.append({"root": term, "members": members})
        alias_of[term] = members
    knowledge = {
        "synonyms": synonyms,
        "hierarchy": hierarchy,
        "mappings": [],
        "reference_year": 2003,
    }

    term_attrs = rng.sample(terms, k=3)
    attrs = list(_INT_ATTRS) + term_attrs

    def random_value(attr: str) -> object:
        if attr in _INT_ATTRS:
            return rng.randint(0, 40)
        roll = rng.random()
        if roll < 0.15:
            return rng.random() < 0.5
        term = rng.choice(terms)
        aliases = alias_of.get(term)
        if aliases and rng.random() < 0.5:
            return rng.choice(aliases)
        return term

    def value_text(value: object) -> str:
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, int):
            return str(value)
        return f'"{value}"'

    clients = []
    publishers = []
    subscribers = []
    counter = 0
    for broker in brokers:
        for _ in range(rng.randint(1, 2)):
            counter += 1
            cid = f"c{counter}"
            clients.append({"id": cid, "broker": broker})
            if rng.random() < 0.5:
                publishers.append(cid)
            if rng.random() < 0.7:
                subscribers.append(cid)
    if not publishers:
        publishers.append(clients[0]["id"])
    if not subscribers:
        subscribers.append(clients[-1]["id"])

    events_by_publisher: dict[str, list[list[tuple[str, object]]]] = {}
    for pub in publishers:
        events = []
        for _ in range(rng.randint(2, 10)):
            pair_attrs = rng.sample(attrs, k=rng.randint(1, 3))
            events.append([(a, random_value(a)) for a in pair_attrs])
        events_by_publisher[pub] = events

    def advertisement_for(events: list[list[tuple[str, object]]]) -> str:
        # One predicate per distinct attribute/value shape so that every
        # published pair is admitted in either mode.
        preds = []
        seen_ints = {}
        seen_exact = set()
        for event in events:
            for attr, value in event:
                if isinstance(value, bool) or not isinstance(value, int):
                    key = (attr, value)
                    if key not in seen_exact:
                        seen_exact.add(key)
                        preds.append(f"({attr} = {value_text(value)})")
                else:
                    seen_ints[attr] = min(seen_ints.get(attr, value), value)
        for attr, low in sorted(seen_ints.items()):
            preds.append(f"({attr} >= {low})")
        return " AND ".join(preds)

    def random_subscription() -> str:
        preds = []
        for attr in rng.sample(attrs, k=rng.randint(1, 3)):
            if attr in _INT_ATTRS:
                op = rng.choice(["=", "!=", "<", "<=", ">", ">="])
                preds.append(f"({attr} {op} {rng.randint(0, 40)})")
            else:
                value = random_value(attr)
                preds.append(f"({attr} = {value_text(value)})")
        return " AND ".join(preds)

    script = []
    for pub in publishers:
        script.append(
            {
                "action": "advertise",
                "client": pub,
                "payload": advertisement_for(events_by_publisher[pub]),
            }
        )
    rng.shuffle(script)

    tail = []
    for _ in range(rng.randint(5, 40)):
        tail.append(
            {
                "action": "subscribe",
                "client": rng.choice(subscribers),
                "payload": random_subscription(),
            }
        )
    for pub, events in events_by_publisher.items():
        for event in events:
            pairs = ", ".join(f"({a}, {value_text(v)})" for a, v in event)
            tail.append(
                {"action": "publish", "client": pub, "payload": "{" + pairs + "}"}
            )
    rng.shuffle(tail)

    return {
        "seed": seed,
        "brokers": brokers,
        "edges": edges,
        "clients": clients,
        "knowledge": knowledge,
        "mode": rng.choice(["syntactic", "semantic"]),
        "script": script + tail,
    }


def generate_scenario(seed: int) -> Scenario:
    return load_scenario(random_scenario_document(seed))
