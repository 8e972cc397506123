"""Broker state machine for an acyclic publish/subscribe overlay.

Each broker knows its neighbor brokers and locally attached clients, both
addressed by link id.  Advertisements flood the tree and are remembered with
the link they arrived on.  Subscriptions are forwarded toward advertisers
only: a subscription travels over a link when some advertisement that
arrived on that link intersects it, and no previously forwarded subscription
on that link already covers it.  Events travel the reverse subscription
paths and reach clients as NOTIFY messages.

Handlers are pure transitions returning (new state, outgoing messages), so a
run can be replayed deterministically and states snapshotted freely.  The
relation set (syntactic or semantic) is fixed per broker by `RoutingMode`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Union

from .knowledge import KnowledgeBase
from .model import Advertisement, Event, Subscription
from .semantic import sem_covers, sem_intersects, sem_match
from .syntactic import covers, intersects, match_event


class RoutingError(ValueError):
    """Raised for messages that violate the broker's link topology."""


class RoutingMode(enum.Enum):
    SYNTACTIC = "syntactic"
    SEMANTIC = "semantic"


class MessageKind(enum.Enum):
    ADVERTISE = "ADVERTISE"
    SUBSCRIBE = "SUBSCRIBE"
    PUBLISH = "PUBLISH"
    NOTIFY = "NOTIFY"


Payload = Union[Advertisement, Subscription, Event]


@dataclass(frozen=True)
class Message:
    kind: MessageKind
    payload: Payload
    frm: str
    to: str
    # Publication sequence number, carried by PUBLISH and NOTIFY so that
    # deliveries of equal events remain distinguishable.
    index: int | None = None


@dataclass(frozen=True)
class SubscriptionEntry:
    sub: Subscription
    origin: str
    forwarded_to: frozenset[str]


@dataclass(frozen=True)
class AdvertisementEntry:
    adv: Advertisement
    origin: str


@dataclass(frozen=True)
class BrokerState:
    id: str
    neighbors: tuple[str, ...]
    clients: tuple[str, ...]
    kb: KnowledgeBase
    mode: RoutingMode
    subscriptions: tuple[SubscriptionEntry, ...] = ()
    advertisements: tuple[AdvertisementEntry, ...] = ()
    suppressed: int = 0
    gated: int = 0
    # Optimization switches; disabling either must never change deliveries,
    # only traffic. Kept on the state so a whole run is self-describing.
    covering_suppression: bool = True
    advertisement_gating: bool = True

    def links(self) -> tuple[str, ...]:
        return self.neighbors + self.clients

    def _check_link(self, link: str) -> None:
        if link not in self.links():
            raise RoutingError(f"broker {self.id!r} has no link {link!r}")

    def _covers(self, s1: Subscription, s2: Subscription) -> bool:
        if self.mode is RoutingMode.SEMANTIC:
            return sem_covers(s1, s2, self.kb)
        return covers(s1, s2)

    def _intersects(self, adv: Advertisement, sub: Subscription) -> bool:
        if self.mode is RoutingMode.SEMANTIC:
            return sem_intersects(adv, sub, self.kb)
        return intersects(adv, sub)

    def _matches(self, event: Event, sub: Subscription) -> bool:
        if self.mode is RoutingMode.SEMANTIC:
            return sem_match(event, sub, self.kb)
        return match_event(event, sub)


def handle_advertise(
    state: BrokerState, adv: Advertisement, frm: str
) -> tuple[BrokerState, list[Message]]:
    """Record the advertisement and flood it to the other neighbors."""
    state._check_link(frm)
    if any(
        e.adv.id == adv.id and e.origin == frm for e in state.advertisements
    ):
        return state, []
    new_state = replace(
        state,
        advertisements=state.advertisements + (AdvertisementEntry(adv, frm),),
    )
    out = [
        Message(MessageKind.ADVERTISE, adv, frm=state.id, to=n)
        for n in state.neighbors
        if n != frm
    ]
    return new_state, out


def handle_subscribe(
    state: BrokerState, sub: Subscription, frm: str
) -> tuple[BrokerState, list[Message]]:
    """Record the subscription and forward it toward intersecting advertisers.

    A neighbor receives the subscription only when an advertisement that
    arrived from that neighbor intersects it (gating) and no subscription
    previously forwarded to that neighbor covers it (suppression).
    """
    state._check_link(frm)
    if any(
        e.sub.id == sub.id and e.origin == frm for e in state.subscriptions
    ):
        return state, []
    forwarded = []
    suppressed = state.suppressed
    gated = state.gated
    for n in state.neighbors:
        if n == frm:
            continue
        if state.advertisement_gating and not any(
            e.origin == n and state._intersects(e.adv, sub)
            for e in state.advertisements
        ):
            gated += 1
            continue
        if state.covering_suppression and any(
            n in e.forwarded_to and state._covers(e.sub, sub)
            for e in state.subscriptions
        ):
            suppressed += 1
            continue
        forwarded.append(n)
    entry = SubscriptionEntry(sub, frm, frozenset(forwarded))
    new_state = replace(
        state,
        subscriptions=state.subscriptions + (entry,),
        suppressed=suppressed,
        gated=gated,
    )
    out = [
        Message(MessageKind.SUBSCRIBE, sub, frm=state.id, to=n)
        for n in forwarded
    ]
    return new_state, out


def handle_publish(
    state: BrokerState, event: Event, frm: str, index: int | None = None
) -> tuple[BrokerState, list[Message]]:
    """Notify interested local clients and forward to interested neighbors.

    At most one copy leaves per link however many subscriptions match there.
    """
    state._check_link(frm)
    out = []
    for c in state.clients:
        if any(
            e.origin == c and state._matches(event, e.sub)
            for e in state.subscriptions
        ):
            out.append(
                Message(MessageKind.NOTIFY, event, frm=state.id, to=c, index=index)
            )
    for n in state.neighbors:
        if n == frm:
            continue
        if any(
            e.origin == n and state._matches(event, e.sub)
            for e in state.subscriptions
        ):
            out.append(
                Message(MessageKind.PUBLISH, event, frm=state.id, to=n, index=index)
            )
    return state, out


def handle_message(
    state: BrokerState, msg: Message
) -> tuple[BrokerState, list[Message]]:
    if msg.kind is MessageKind.ADVERTISE:
        return handle_advertise(state, msg.payload, msg.frm)
    if msg.kind is MessageKind.SUBSCRIBE:
        return handle_subscribe(state, msg.payload, msg.frm)
    if msg.kind is MessageKind.PUBLISH:
        return handle_publish(state, msg.payload, msg.frm, msg.index)
    raise RoutingError(f"broker {state.id!r} cannot handle {msg.kind.value}")
