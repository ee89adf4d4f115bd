from __future__ import annotations

import pytest

from src.codec import (
    AsyncNode,
    CodingTree,
    MessageStore,
    PeelingDecoder,
    TreeCode,
    line_closed_form,
    line_decode,
    line_encode_async,
    line_source_encode_sync,
    linestar_relay_closed_form,
    star_decode,
    star_encode_async,
    star_relay_closed_form,
    star_source_encode,
    unroll_sync,
)
from src.errors import ArgumentError, ProtocolViolation
from src.finite_field import choose_triplets, field_for
from src.headers import LineHeader, Packet, StarHeader, wrap


def messages(origin: int, seq: int) -> int:
    """Deterministic nonzero payloads: distinct per origin and sequence number."""
    return (origin * 37 + seq * 11 + 1) % 255 + 1


def store_with(origins, upto: dict[int, int]) -> MessageStore:
    store = MessageStore(origins)
    for o, last in upto.items():
        for s in range(last + 1):
            store.put(o, s, messages(o, s))
    return store


# -- MessageStore -------------------------------------------------------------

def test_store_zero_convention_and_watermark():
    store = MessageStore((1, 3), horizon={1: 5, 3: 5})
    assert store.get(1, -1) == 0
    assert store.get(1, 5) == 0
    assert store.put(1, 0, 9)
    assert not store.put(1, 0, 9)
    assert store.put(1, 2, 7)
    assert store.watermark(1) == 0
    assert store.put(1, 1, 4)
    assert store.watermark(1) == 2
    with pytest.raises(ProtocolViolation):
        store.get(3, 0)
    with pytest.raises(ArgumentError):
        store.get(2, 0)


def test_store_retention_evicts_old_messages():
    store = MessageStore((1,), retention=2)
    for s in range(6):
        store.put(1, s, s + 1)
    assert store.decoded(1) == [3, 4, 5]
    assert store.known(1, 0)
    with pytest.raises(ProtocolViolation):
        store.get(1, 0)


# -- trees --------------------------------------------------------------------

def test_tree_validation():
    with pytest.raises(ArgumentError):
        CodingTree("line", (1, 2), ((1, 2, None), (2, 3, None)))
    with pytest.raises(ArgumentError):
        CodingTree("star", (1, 2, 3), ((4, 1, None), (4, 2, None)))
    with pytest.raises(ArgumentError):
        CodingTree("line", (1, 4), ((1, 2, None), (2, 3, None), (2, 4, None)))


def test_tree_geometry():
    star = CodingTree.star(4, (1, 2, 3))
    assert star.L == 2 and star.period == 2 and star.c == 1
    assert star.relays() == [4]
    ls = CodingTree.linestar([(1, 5, 4), (2, 4), (3, 4)])
    assert ls.L == 3
    assert ls.upstream(5, 4, 1)
    assert not ls.upstream(5, 4, 2)
    line = CodingTree.line([1, 2, 3, 4])
    assert line.L == 3 and line.period == 1 and line.c == 0


# -- synchronized encoders ------------------------------------------------------

def test_line_source_examples():
    gf = field_for(8)
    store = store_with((1, 3), {1: 10, 3: 10})
    assert line_source_encode_sync(1, 0, store, (1, 1), 3, gf) == messages(1, 0)
    assert line_source_encode_sync(1, 5, store, (1, 1), 3, gf) == messages(1, 5) ^ messages(3, 3)
    two = store_with((1, 2), {1: 10, 2: 10})
    assert line_source_encode_sync(1, 4, two, (1, 1), 2, gf) == messages(1, 4) ^ messages(2, 3)
    with pytest.raises(ArgumentError):
        line_source_encode_sync(2, 0, store, (1, 1), 3, gf)


def test_line_source_needs_decoded_message():
    gf = field_for(8)
    store = store_with((1, 3), {1: 10, 3: 1})
    with pytest.raises(ProtocolViolation):
        line_source_encode_sync(1, 5, store, (1, 1), 3, gf)


def test_star_source_example():
    gf = field_for(8)
    trip = choose_triplets(8)
    store = store_with((1, 2, 3), {1: 5, 2: 5, 3: 5})
    assert star_source_encode(1, 0, store, trip, gf) == messages(1, 0)
    b = trip.b
    want = gf.mul(b[0], messages(1, 2)) ^ gf.mul(b[1], messages(2, 1)) ^ gf.mul(b[2], messages(3, 1))
    assert star_source_encode(1, 5, store, trip, gf) == want


@pytest.mark.parametrize("bits", [2, 8])
@pytest.mark.parametrize("M", [3, 4, 5])
def test_line_recursion_matches_closed_form(bits, M):
    gf = field_for(bits)
    msgs = lambda o, s: messages(o, s) % gf.order
    code = TreeCode(CodingTree.line(range(1, M + 1)), gf)
    out = unroll_sync(code, 51, msgs)
    for r in range(1, M + 1):
        for t in range(51):
            assert out[r][t] == line_closed_form(r, t, M, (1, 1), msgs, gf)


@pytest.mark.parametrize("bits", [2, 8])
def test_star_relay_recursion_matches_closed_form(bits):
    gf = field_for(bits)
    msgs = lambda o, s: messages(o, s) % gf.order
    code = TreeCode(CodingTree.star(4, (1, 2, 3)), gf)
    out = unroll_sync(code, 51, msgs)
    for t in range(51):
        assert out[4][t] == star_relay_closed_form(t, code.triplets, msgs, gf)
    # the echoes of the older messages cancel at the relay
    assert out[4][4] == gf.dot(code.triplets.b, [msgs(o, 1) for o in (1, 2, 3)])


@pytest.mark.parametrize("bits", [2, 8])
def test_linestar_relay_recursion_matches_closed_form(bits):
    gf = field_for(bits)
    msgs = lambda o, s: messages(o, s) % gf.order
    code = TreeCode(CodingTree.linestar([(1, 5, 4), (2, 4), (3, 4)]), gf)
    out = unroll_sync(code, 51, msgs)
    for t in range(51):
        assert out[5][t] == linestar_relay_closed_form(t, code.triplets, msgs, gf)
        assert out[4][t] == code.closed_form(4, t, msgs)


def test_linestar_relay_example_timestamps():
    gf = field_for(8)
    code = TreeCode(CodingTree.linestar([(1, 5, 4), (2, 4), (3, 4)]), gf)
    seqs = sorted((o, s) for o, s, _ in code.closed_form_terms(5, 5))
    # timestamps 4, 2, 2 at period 2
    assert seqs == [(1, 2), (2, 1), (3, 1)]


# -- peeling decoder ----------------------------------------------------------

def test_peeling_pairs_two_unknowns():
    gf = field_for(8)
    trip = choose_triplets(8)
    store = store_with((1, 2, 3), {1: 0})
    dec = PeelingDecoder(gf, store)
    vals = {o: messages(o, 0) for o in (1, 2, 3)}
    for phase in (0, 1):
        k = trip.for_phase(phase)
        value = gf.dot(k, [vals[1], vals[2], vals[3]])
        got = dec.add([(o, 0, k[idx]) for idx, o in enumerate((1, 2, 3))], value, period=2)
        if phase == 0:
            assert got == []
    assert {(m.origin, m.timestamp, m.payload) for m in got} == {(2, 0, vals[2]), (3, 0, vals[3])}
    assert dec.pending == []


def test_peeling_only_decodes_on_an_independent_partner():
    gf = field_for(8)
    store = MessageStore((1, 2, 3))
    dec = PeelingDecoder(gf, store)
    u, v = messages(2, 0), messages(3, 0)

    def combo(a, b):
        return gf.mul(a, u) ^ gf.mul(b, v)

    assert dec.add([(2, 0, 1), (3, 0, 2)], combo(1, 2)) == []
    # a scaled copy spans the same line: still rank 1
    s = 3
    assert dec.add([(2, 0, s), (3, 0, gf.mul(s, 2))], combo(s, gf.mul(s, 2))) == []
    assert len(dec.pending) == 2
    assert store.decoded(2) == [] and store.decoded(3) == []

    got = dec.add([(2, 0, 1), (3, 0, 3)], combo(1, 3))
    assert sorted((m.origin, m.payload) for m in got) == [(2, u), (3, v)]
    assert dec.pending == []
    # nothing new is innovative once both are known
    assert dec.add([(2, 0, 1), (3, 0, 2)], combo(1, 2)) == []


def test_peeling_rejects_inconsistent_and_non_instant_packets():
    gf = field_for(8)
    store = store_with((1, 2), {1: 3, 2: 3})
    dec = PeelingDecoder(gf, store)
    with pytest.raises(ProtocolViolation) as err:
        dec.add([(1, 0, 1), (2, 0, 1)], 0 if messages(1, 0) != messages(2, 0) else 1, event_id=17)
    assert err.value.event_id == 17

    instant = PeelingDecoder(gf, MessageStore((1, 2)), instant=True)
    with pytest.raises(ProtocolViolation):
        instant.add([(1, 0, 1), (2, 0, 1)], 5)


# -- unsynchronized nodes -----------------------------------------------------

def test_fresh_async_node_sends_zero_with_nothing_yet_indices():
    gf = field_for(8)
    code = TreeCode(CodingTree.line([1, 2, 3]), gf)
    node = AsyncNode(code, 2, MessageStore((1, 3)), D=2)
    pkt = line_encode_async(node)
    assert pkt.payload == 0
    assert pkt.header == LineHeader(wrap(-1, 2), wrap(-1, 2))


def test_async_line_node_forwards_in_order_and_decodes():
    gf = field_for(8)
    code = TreeCode(CodingTree.line([1, 2, 3]), gf)
    D = 2
    relay = AsyncNode(code, 2, MessageStore((1, 3)), D)
    left = AsyncNode(code, 1, store_with((1, 3), {1: 7}), D)

    left.advance()
    pkt = line_encode_async(left)
    assert pkt.payload == messages(1, 0)
    got = line_decode(relay, 1, pkt)
    assert [(m.origin, m.timestamp) for m in got] == [(1, 0)]

    relay.advance()
    out = line_encode_async(relay)
    assert out.header == LineHeader(0, wrap(-1, D))
    # node 1 subtracts its own W1[0] and learns nothing new
    assert line_decode(left, 2, out) == []


def test_async_line_relay_holding_messages():
    gf = field_for(8)
    code = TreeCode(CodingTree.line([1, 2, 3, 4]), gf)
    node = AsyncNode(code, 2, store_with((1, 4), {1: 7, 4: 4}), D=3)
    for _ in range(8):
        node.advance()
    pkt = line_encode_async(node)
    assert node.pointer == {1: 7, 4: 4}
    assert pkt.header == LineHeader(wrap(7, 3), wrap(4, 3))
    assert pkt.payload == messages(1, 7) ^ messages(4, 4)


def test_async_star_pair_decodes_at_source():
    gf = field_for(8)
    code = TreeCode(CodingTree.star(4, (1, 2, 3)), gf)
    D = 2
    relay = AsyncNode(code, 4, store_with((1, 2, 3), {1: 0, 2: 0, 3: 0}), D)
    relay.advance()
    assert relay.phases(0) == (0, 1)
    src = AsyncNode(code, 1, store_with((1, 2, 3), {1: 0}), D)
    src.advance()
    pkts = [star_encode_async(relay, 0), star_encode_async(relay, 1)]
    assert all(isinstance(p.header, StarHeader) for p in pkts)
    got = star_decode(src, 4, pkts)
    assert {(m.origin, m.payload) for m in got} == {(2, messages(2, 0)), (3, messages(3, 0))}
    assert src.store.watermark(2) == 0 and src.store.watermark(3) == 0


def test_async_receive_from_non_neighbor():
    gf = field_for(8)
    code = TreeCode(CodingTree.line([1, 2, 3]), gf)
    node = AsyncNode(code, 1, MessageStore((1, 3)), D=1)
    with pytest.raises(ProtocolViolation):
        node.receive(3, Packet(LineHeader(1, 1), 0, 0))


def test_wrong_block_kind_rejected():
    gf = field_for(8)
    star = AsyncNode(TreeCode(CodingTree.star(4, (1, 2, 3)), gf), 4, MessageStore((1, 2, 3)), D=1)
    with pytest.raises(ArgumentError):
        line_encode_async(star)
    line = AsyncNode(TreeCode(CodingTree.line([1, 2]), gf), 1, MessageStore((1, 2)), D=1)
    with pytest.raises(ArgumentError):
        star_encode_async(line, 0)
