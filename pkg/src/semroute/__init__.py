"""Semantic content-based publish/subscribe matching and simulation."""

from .knowledge import (
    KnowledgeBase,
    KnowledgeError,
    MappingEvaluationError,
    MappingFunction,
    SynonymGroup,
    apply_mapping,
    load_knowledge,
)
from .model import (
    Advertisement,
    Event,
    Pair,
    ParseError,
    Predicate,
    RelOp,
    Subscription,
    Value,
    ValueKind,
    parse_advertisement,
    parse_event,
    parse_subscription,
    render,
)
from .routing import (
    BrokerState,
    Message,
    MessageKind,
    RoutingError,
    RoutingMode,
    handle_advertise,
    handle_message,
    handle_publish,
    handle_subscribe,
)
from .semantic import (
    AddedPair,
    AugmentedEvent,
    Provenance,
    augment,
    normalize_event,
    normalize_subscription,
    pair_sem_matches,
    sem_covers,
    sem_determines,
    sem_intersects,
    sem_match,
)
from .sim import (
    Scenario,
    ScenarioError,
    SimReport,
    Verdict,
    generate_scenario,
    load_scenario,
    oracle_deliveries,
    random_scenario_document,
    run,
    verify,
)
from .syntactic import (
    covers,
    determines,
    intersects,
    match_event,
    match_pair,
)

__version__ = "0.1.0"

__all__ = [
    "AddedPair",
    "Advertisement",
    "AugmentedEvent",
    "BrokerState",
    "Event",
    "KnowledgeBase",
    "KnowledgeError",
    "MappingEvaluationError",
    "MappingFunction",
    "Message",
    "MessageKind",
    "Pair",
    "ParseError",
    "Predicate",
    "Provenance",
    "RelOp",
    "RoutingError",
    "RoutingMode",
    "Scenario",
    "ScenarioError",
    "SimReport",
    "Subscription",
    "SynonymGroup",
    "Value",
    "ValueKind",
    "Verdict",
    "apply_mapping",
    "augment",
    "covers",
    "determines",
    "generate_scenario",
    "handle_advertise",
    "handle_message",
    "handle_publish",
    "handle_subscribe",
    "intersects",
    "load_knowledge",
    "load_scenario",
    "match_event",
    "match_pair",
    "normalize_event",
    "normalize_subscription",
    "oracle_deliveries",
    "pair_sem_matches",
    "parse_advertisement",
    "parse_event",
    "parse_subscription",
    "random_scenario_document",
    "render",
    "run",
    "sem_covers",
    "sem_determines",
    "sem_intersects",
    "sem_match",
    "verify",
]
