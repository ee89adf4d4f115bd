# src/headers.py
# --------------------------------------------
# Bit-exact packet headers for the unsynchronized codecs.
#
# Layout, most significant bit first:
#   [index per origin, w bits each][k bit, star-type only][block id, ceil(log2 h) bits]
# with w = ceil(log2 2D). Indices are message sequence numbers modulo 2^w;
# sequence -1 ("nothing yet") is the all-ones pattern.

from dataclasses import dataclass

import numpy as np

from src.errors import ArgumentError, ProtocolViolation

LINE = "line"
STAR = "star"


def index_width(D: int) -> int:
    """ceil(log2 2D)."""
    if D < 1:
        raise ArgumentError(f"delay bound must be >= 1, got {D}")
    return (2 * D - 1).bit_length()


def block_width(h_blocks: int) -> int:
    """ceil(log2 h); zero for a single block."""
    if h_blocks < 1:
        return 0
    return (h_blocks - 1).bit_length()


def header_width(kind: str, D: int, h_blocks: int = 1) -> int:
    w = index_width(D)
    if kind == LINE:
        return 2 * w + block_width(h_blocks)
    if kind == STAR:
        return 3 * w + 1 + block_width(h_blocks)
    raise ArgumentError(f"unknown header kind {kind!r}")


def wrap(seq: int, D: int) -> int:
    return seq % (1 << index_width(D))


def resolve_upstream(index: int, last_sent: int, D: int) -> int:
    """Absolute sequence for an origin the receiver itself forwards.

    The value echoed back lies in (last_sent - 2^w, last_sent].
    """
    mod = 1 << index_width(D)
    return last_sent - ((last_sent - index) % mod)


def resolve_downstream(index: int, watermark: int, D: int) -> int:
    """Absolute sequence for an origin the receiver learns from the sender.

    The sender's index lies in [watermark - D + 1, watermark + D].
    """
    mod = 1 << index_width(D)
    low = watermark - D + 1
    return low + ((index - low) % mod)


@dataclass(frozen=True)
class LineHeader:
    p: int
    q: int

    @property
    def kind(self) -> str:
        return LINE

    @property
    def indices(self) -> tuple[int, ...]:
        return (self.p, self.q)


@dataclass(frozen=True)
class StarHeader:
    p: int
    q: int
    u: int
    k: int

    def __post_init__(self):
        if self.k not in (0, 1):
            raise ArgumentError(f"k bit must be 0 or 1, got {self.k}")

    @property
    def kind(self) -> str:
        return STAR

    @property
    def indices(self) -> tuple[int, ...]:
        return (self.p, self.q, self.u)


def make_header(kind: str, indices, k: int = 0) -> LineHeader | StarHeader:
    if kind == LINE:
        p, q = indices
        return LineHeader(p, q)
    p, q, u = indices
    return StarHeader(p, q, u, k)


def _field(value: int, width: int, name: str) -> str:
    if width == 0:
        if value != 0:
            raise ArgumentError(f"{name} {value} does not fit 0 bits")
        return ""
    if not 0 <= value < (1 << width):
        raise ArgumentError(f"{name} {value} does not fit {width} bits")
    return format(value, f"0{width}b")


def pack_header(h: LineHeader | StarHeader, block_id: int, D: int, h_blocks: int = 1) -> str:
    """Header as a '0'/'1' string of exactly header_width(kind, D, h_blocks) bits."""
    w = index_width(D)
    bits = "".join(_field(i, w, "index") for i in h.indices)
    if isinstance(h, StarHeader):
        bits += str(h.k)
    if h_blocks > 1:
        bits += _field(block_id, block_width(h_blocks), "block id")
    elif block_id != 0:
        raise ArgumentError(f"block id {block_id} with a single block")
    return bits


def unpack_header(bits: str, kind: str, D: int, h_blocks: int = 1) -> tuple[LineHeader | StarHeader, int]:
    width = header_width(kind, D, h_blocks)
    if len(bits) != width or set(bits) - {"0", "1"}:
        raise ArgumentError(f"expected {width} header bits, got {bits!r}")
    w = index_width(D)
    n_idx = 2 if kind == LINE else 3
    indices = [int(bits[i * w:(i + 1) * w], 2) for i in range(n_idx)]
    pos = n_idx * w
    k = 0
    if kind == STAR:
        k = int(bits[pos])
        pos += 1
    block_id = int(bits[pos:], 2) if pos < len(bits) else 0
    return make_header(kind, indices, k), block_id


@dataclass(frozen=True)
class Packet:
    header: LineHeader | StarHeader | None
    block_id: int
    payload: int


def packet_to_bytes(pkt: Packet, D: int, h_blocks: int, field_bits: int) -> bytes:
    """Header bits then the C-bit payload, MSB first, zero-padded to a byte."""
    bits = pack_header(pkt.header, pkt.block_id, D, h_blocks) + _field(pkt.payload, field_bits, "payload")
    arr = np.fromiter((c == "1" for c in bits), dtype=np.uint8, count=len(bits))
    return np.packbits(arr, bitorder="big").tobytes()


def packet_from_bytes(data: bytes, kind: str, D: int, h_blocks: int, field_bits: int) -> Packet:
    width = header_width(kind, D, h_blocks)
    total = width + field_bits
    arr = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="big")
    if arr.size < total:
        raise ProtocolViolation(f"packet of {arr.size} bits is shorter than {total}")
    bits = "".join("1" if b else "0" for b in arr[:total])
    header, block_id = unpack_header(bits[:width], kind, D, h_blocks)
    payload = int(bits[width:], 2) if field_bits else 0
    return Packet(header, block_id, payload)


def header_hex(h: LineHeader | StarHeader | None, block_id: int, D: int, h_blocks: int) -> str:
    if h is None:
        return ""
    bits = pack_header(h, block_id, D, h_blocks)
    return format(int(bits, 2), f"0{(len(bits) + 3) // 4}x")
