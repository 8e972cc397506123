import pytest

from semroute.knowledge import KnowledgeBase
from semroute.model import parse_advertisement, parse_event, parse_subscription
from semroute.routing import (
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

ADV = parse_advertisement('(product = "computer") AND (brand = "IBM") AND (price <= 1500)')
SUB_WIDE = parse_subscription('(product = "computer") AND (brand = "IBM") AND (price <= 1600)')
SUB_NARROW = parse_subscription('(product = "computer") AND (brand = "IBM") AND (price <= 1500)')
EVENT = parse_event('{(product, "computer"), (brand, "IBM"), (price, 1400)}')


def broker(
    broker_id="b2",
    neighbors=("b1", "b3"),
    clients=("c1",),
    mode=RoutingMode.SYNTACTIC,
    kb=None,
    **flags,
) -> BrokerState:
    return BrokerState(
        id=broker_id,
        neighbors=tuple(neighbors),
        clients=tuple(clients),
        kb=kb if kb is not None else KnowledgeBase.empty(),
        mode=mode,
        **flags,
    )


class TestAdvertise:
    def test_flooded_to_other_neighbors_only(self):
        state, out = handle_advertise(broker(), ADV, frm="b1")
        assert [(m.kind, m.to, m.frm) for m in out] == [
            (MessageKind.ADVERTISE, "b3", "b2")
        ]
        assert state.advertisements[0].origin == "b1"

    def test_client_advertisement_floods_to_all_neighbors(self):
        state, out = handle_advertise(broker(), ADV, frm="c1")
        assert sorted(m.to for m in out) == ["b1", "b3"]

    def test_duplicate_from_same_origin_ignored(self):
        state, _ = handle_advertise(broker(), ADV, frm="b1")
        state2, out = handle_advertise(state, ADV, frm="b1")
        assert state2 is state
        assert out == []

    def test_same_advertisement_different_origin_kept(self):
        state, _ = handle_advertise(broker(), ADV, frm="b1")
        state2, out = handle_advertise(state, ADV, frm="c1")
        assert len(state2.advertisements) == 2
        assert [m.to for m in out] == ["b1", "b3"]

    def test_unknown_link_rejected(self):
        with pytest.raises(RoutingError, match="no link"):
            handle_advertise(broker(), ADV, frm="nowhere")


class TestSubscribeGating:
    def test_blocked_without_intersecting_advertisement(self):
        state, out = handle_subscribe(broker(), SUB_WIDE, frm="c1")
        assert out == []
        assert state.gated == 2
        assert state.subscriptions[0].forwarded_to == frozenset()

    def test_forwarded_only_toward_the_advertiser(self):
        state, _ = handle_advertise(broker(), ADV, frm="b1")
        state, out = handle_subscribe(state, SUB_WIDE, frm="c1")
        assert [(m.kind, m.to) for m in out] == [(MessageKind.SUBSCRIBE, "b1")]
        assert state.gated == 1

    def test_non_intersecting_advertisement_does_not_open_the_gate(self):
        other = parse_advertisement('(product = "book")')
        state, _ = handle_advertise(broker(), other, frm="b1")
        state, out = handle_subscribe(state, SUB_WIDE, frm="c1")
        assert out == []

    def test_gate_disabled_floods(self):
        state, out = handle_subscribe(
            broker(advertisement_gating=False), SUB_WIDE, frm="c1"
        )
        assert sorted(m.to for m in out) == ["b1", "b3"]
        assert state.gated == 0

    def test_never_forwarded_back_to_its_origin(self):
        state, _ = handle_advertise(broker(), ADV, frm="b1")
        state, out = handle_subscribe(state, SUB_WIDE, frm="b1")
        assert out == []


class TestSubscribeSuppression:
    def advertised(self, **flags):
        state, _ = handle_advertise(broker(**flags), ADV, frm="b1")
        return state

    def test_covered_subscription_not_reforwarded(self):
        state = self.advertised()
        state, first = handle_subscribe(state, SUB_WIDE, frm="c1")
        assert [m.to for m in first] == ["b1"]
        state, second = handle_subscribe(state, SUB_NARROW, frm="c1")
        assert second == []
        assert state.suppressed == 1
        assert state.subscriptions[1].forwarded_to == frozenset()

    def test_wider_subscription_still_forwarded(self):
        state = self.advertised()
        state, _ = handle_subscribe(state, SUB_NARROW, frm="c1")
        state, out = handle_subscribe(state, SUB_WIDE, frm="c1")
        assert [m.to for m in out] == ["b1"]
        assert state.suppressed == 0

    def test_suppression_scoped_to_the_link_actually_used(self):
        # The covering subscription was gated off b1, so it must not
        # suppress a later subscription on that link.
        state, _ = handle_advertise(broker(), ADV, frm="b1")
        gated_wide = parse_subscription('(product = "book")')
        state, _ = handle_subscribe(state, gated_wide, frm="c1")
        book_adv = parse_advertisement('(product = "book") AND (price <= 100)')
        state, _ = handle_advertise(state, book_adv, frm="b1")
        narrow = parse_subscription('(product = "book") AND (price <= 5)')
        state, out = handle_subscribe(state, narrow, frm="c1")
        assert [m.to for m in out] == ["b1"]

    def test_suppression_disabled_forwards_everything(self):
        state = self.advertised(covering_suppression=False)
        state, _ = handle_subscribe(state, SUB_WIDE, frm="c1")
        state, out = handle_subscribe(state, SUB_NARROW, frm="c1")
        assert [m.to for m in out] == ["b1"]
        assert state.suppressed == 0

    def test_semantic_covering_suppresses(self, example_kb):
        adv = parse_advertisement('(product = "printed material") AND (price >= 0)')
        state, _ = handle_advertise(
            broker(mode=RoutingMode.SEMANTIC, kb=example_kb), adv, frm="b1"
        )
        general = parse_subscription('(product = "printed material")')
        specific = parse_subscription('(product = "book")')
        state, first = handle_subscribe(state, general, frm="c1")
        assert [m.to for m in first] == ["b1"]
        state, second = handle_subscribe(state, specific, frm="c1")
        assert second == []
        assert state.suppressed == 1

    def test_duplicate_subscription_ignored(self):
        state = self.advertised()
        state, _ = handle_subscribe(state, SUB_WIDE, frm="c1")
        state2, out = handle_subscribe(state, SUB_WIDE, frm="c1")
        assert state2 is state
        assert out == []


class TestPublish:
    def routed(self, mode=RoutingMode.SYNTACTIC, kb=None):
        state = broker(clients=("c1", "c2"), mode=mode, kb=kb)
        state, _ = handle_advertise(state, ADV, frm="b1")
        return state

    def test_notify_every_matching_client(self):
        state = self.routed()
        state, _ = handle_subscribe(state, SUB_WIDE, frm="c1")
        state, _ = handle_subscribe(state, SUB_NARROW, frm="c2")
        _, out = handle_publish(state, EVENT, frm="b1", index=3)
        assert [(m.kind, m.to, m.index) for m in out] == [
            (MessageKind.NOTIFY, "c1", 3),
            (MessageKind.NOTIFY, "c2", 3),
        ]

    def test_one_publish_per_link_despite_many_subscriptions(self):
        state = self.routed()
        state, _ = handle_subscribe(state, SUB_WIDE, frm="b3")
        state, _ = handle_subscribe(
            state, parse_subscription('(product = "computer")'), frm="b3"
        )
        _, out = handle_publish(state, EVENT, frm="b1")
        assert [(m.kind, m.to) for m in out] == [(MessageKind.PUBLISH, "b3")]

    def test_not_forwarded_back_to_sender(self):
        state = self.routed()
        state, _ = handle_subscribe(state, SUB_WIDE, frm="b1")
        _, out = handle_publish(state, EVENT, frm="b1")
        assert out == []

    def test_publishing_client_is_not_excluded_from_notification(self):
        # A client whose own subscription matches its publication hears it.
        state = self.routed()
        state, _ = handle_subscribe(state, SUB_WIDE, frm="c1")
        _, out = handle_publish(state, EVENT, frm="c1")
        assert [(m.kind, m.to) for m in out] == [(MessageKind.NOTIFY, "c1")]

    def test_semantic_mode_notifies_through_the_hierarchy(self, example_kb):
        state = broker(mode=RoutingMode.SEMANTIC, kb=example_kb)
        adv = parse_advertisement('(product = "printed material") AND (price >= 10)')
        state, _ = handle_advertise(state, adv, frm="b1")
        sub = parse_subscription('(product = "book") AND (price <= 20)')
        state, _ = handle_subscribe(state, sub, frm="c1")
        event = parse_event('{(product, "book"), (price, 15)}')
        _, out = handle_publish(state, event, frm="b1", index=0)
        assert [(m.kind, m.to) for m in out] == [(MessageKind.NOTIFY, "c1")]

    def test_publish_state_unchanged(self):
        state = self.routed()
        state2, _ = handle_publish(state, EVENT, frm="b1")
        assert state2 is state


class TestHandleMessage:
    def test_dispatch(self):
        state = broker()
        state, _ = handle_message(
            state, Message(MessageKind.ADVERTISE, ADV, frm="b1", to="b2")
        )
        state, _ = handle_message(
            state, Message(MessageKind.SUBSCRIBE, SUB_WIDE, frm="c1", to="b2")
        )
        _, out = handle_message(
            state, Message(MessageKind.PUBLISH, EVENT, frm="b1", to="b2", index=0)
        )
        assert [m.kind for m in out] == [MessageKind.NOTIFY]

    def test_notify_is_not_a_broker_input(self):
        with pytest.raises(RoutingError, match="NOTIFY"):
            handle_message(
                broker(), Message(MessageKind.NOTIFY, EVENT, frm="b1", to="b2")
            )


class TestThreeBrokerChain:
    """Advertisements flow outward; subscriptions retrace them hop by hop."""

    def setup_chain(self, mode=RoutingMode.SYNTACTIC, kb=None):
        kb = kb if kb is not None else KnowledgeBase.empty()
        return {
            "b1": broker("b1", neighbors=("b2",), clients=("pub",), mode=mode, kb=kb),
            "b2": broker("b2", neighbors=("b1", "b3"), clients=(), mode=mode, kb=kb),
            "b3": broker("b3", neighbors=("b2",), clients=("sub",), mode=mode, kb=kb),
        }

    def run_wave(self, states, messages):
        while messages:
            msg = messages.pop(0)
            if msg.to not in states:
                continue
            states[msg.to], out = handle_message(states[msg.to], msg)
            messages.extend(out)
        return states

    def test_subscription_retraces_advertisement_path(self):
        states = self.setup_chain()
        states = self.run_wave(
            states, [Message(MessageKind.ADVERTISE, ADV, frm="pub", to="b1")]
        )
        assert states["b2"].advertisements[0].origin == "b1"
        assert states["b3"].advertisements[0].origin == "b2"

        states = self.run_wave(
            states, [Message(MessageKind.SUBSCRIBE, SUB_WIDE, frm="sub", to="b3")]
        )
        assert states["b3"].subscriptions[0].forwarded_to == frozenset({"b2"})
        assert states["b2"].subscriptions[0].origin == "b3"
        assert states["b1"].subscriptions[0].origin == "b2"

        notified = []
        messages = [Message(MessageKind.PUBLISH, EVENT, frm="pub", to="b1", index=0)]
        while messages:
            msg = messages.pop(0)
            if msg.kind is MessageKind.NOTIFY:
                notified.append((msg.to, msg.frm))
                continue
            states[msg.to], out = handle_message(states[msg.to], msg)
            messages.extend(out)
        assert notified == [("sub", "b3")]
