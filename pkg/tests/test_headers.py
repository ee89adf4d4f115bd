from __future__ import annotations

import math

import pytest

from src.errors import ArgumentError, ProtocolViolation
from src.headers import (
    LINE,
    STAR,
    LineHeader,
    Packet,
    StarHeader,
    header_hex,
    header_width,
    index_width,
    pack_header,
    packet_from_bytes,
    packet_to_bytes,
    resolve_downstream,
    resolve_upstream,
    unpack_header,
    wrap,
)


def clog2(x: int) -> int:
    return math.ceil(math.log2(x)) if x > 1 else 0


@pytest.mark.parametrize("D", range(1, 17))
@pytest.mark.parametrize("h", range(1, 9))
def test_header_widths_match_closed_forms(D, h):
    w = clog2(2 * D)
    assert index_width(D) == w
    assert header_width(LINE, D) == 2 * w
    assert header_width(STAR, D) == 3 * w + 1
    assert header_width(STAR, D, h) == 3 * w + 1 + clog2(h)
    assert header_width(LINE, D, h) == 2 * w + clog2(h)


def test_header_width_examples():
    assert header_width(LINE, 4) == 6
    assert header_width(STAR, 4, 1) == 10
    assert header_width(STAR, 4, 3) == 12


def test_pack_and_unpack_star_header():
    h = StarHeader(5, 0, 7, 1)
    bits = pack_header(h, 2, D=4, h_blocks=3)
    assert bits == "101" + "000" + "111" + "1" + "10"
    assert unpack_header(bits, STAR, D=4, h_blocks=3) == (h, 2)


def test_pack_rejects_overflow():
    with pytest.raises(ArgumentError):
        pack_header(LineHeader(8, 0), 0, D=4)
    with pytest.raises(ArgumentError):
        pack_header(LineHeader(0, 0), 1, D=4, h_blocks=1)
    with pytest.raises(ArgumentError):
        StarHeader(0, 0, 0, 2)


def test_nothing_yet_is_all_ones():
    assert wrap(-1, 3) == 0b111
    assert pack_header(LineHeader(wrap(-1, 3), wrap(-1, 3)), 0, D=3) == "111111"


@pytest.mark.parametrize("D", [1, 2, 3, 4])
def test_upstream_resolution_window(D):
    mod = 1 << index_width(D)
    for last_sent in range(-1, 30):
        for seq in range(last_sent - mod + 1, last_sent + 1):
            assert resolve_upstream(wrap(seq, D), last_sent, D) == seq


@pytest.mark.parametrize("D", [1, 2, 3, 4])
def test_downstream_resolution_window(D):
    for mark in range(-1, 30):
        for seq in range(mark - D + 1, mark + D + 1):
            assert resolve_downstream(wrap(seq, D), mark, D) == seq


def test_packet_bytes_layout():
    pkt = Packet(LineHeader(1, 2), 0, 0xAB)
    data = packet_to_bytes(pkt, D=2, h_blocks=1, field_bits=8)
    # 01 10 then 10101011, padded to two bytes
    assert data == bytes([0b01101010, 0b10110000])
    assert packet_from_bytes(data, LINE, D=2, h_blocks=1, field_bits=8) == pkt


def test_short_packet_is_a_protocol_violation():
    with pytest.raises(ProtocolViolation):
        packet_from_bytes(b"\x00", STAR, D=4, h_blocks=1, field_bits=8)


def test_header_hex():
    assert header_hex(None, 0, 2, 1) == ""
    assert header_hex(LineHeader(3, 3), 0, 2, 1) == "f"
