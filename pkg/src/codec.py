# src/codec.py
# --------------------------------------------
# Encoders and decoders for the coding building blocks.
#
# Every block is a "coding tree": a tree of wireless nodes whose origins
# (2 for a line, 3 for a star or line-star) exchange messages. Origin o's
# traveling term at origin slot s is
#     line:       k_o * W_o[s]
#     star-type:  k_o(s mod 2) * W_o[s // 2]      (a on even s, b on odd s)
# where W_o[g] is origin o's g-th message (its timestamp is g * period).
# In synchronized mode node n transmits X_n(t) = sum_o T_o(t - dist(n, o)).
#
# Unsynchronized nodes forward each origin's messages in order, one new index
# per slot, and tag packets with the indices they used (see headers.py).

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable

import networkx as nx

from src.config import dbg
from src.errors import ArgumentError, ProtocolViolation
from src.finite_field import CoeffTriplets, GaloisField, choose_triplets
from src.headers import (
    LINE,
    STAR,
    LineHeader,
    Packet,
    StarHeader,
    make_header,
    resolve_downstream,
    resolve_upstream,
    wrap,
)

LINE_KIND = "line"
STAR_KIND = "star"
LINESTAR_KIND = "linestar"

MessageSource = Callable[[int, int], int]


@dataclass(frozen=True)
class Message:
    origin: int
    timestamp: int
    payload: int
    dest: int | None = None


# ---------------------------------------------------------------------------
# Message store
# ---------------------------------------------------------------------------

class MessageStore:
    """Decoded messages per origin, keyed by message sequence number.

    Sequence numbers below zero and at or above the origin's horizon are the
    zero message. The watermark is the highest g such that 0..g are all held.
    """

    def __init__(self, origins: Iterable[int], horizon: dict[int, int] | None = None, retention: int | None = None):
        self.origins = tuple(origins)
        self.horizon = dict(horizon or {})
        self.retention = retention
        self._data: dict[int, dict[int, int]] = {o: {} for o in self.origins}
        self._watermark: dict[int, int] = {o: -1 for o in self.origins}
        self._evicted_below: dict[int, int] = {o: 0 for o in self.origins}

    def _check_origin(self, origin: int):
        if origin not in self._data:
            raise ArgumentError(f"origin {origin} is not served by this store")

    def is_zero(self, origin: int, seq: int) -> bool:
        limit = self.horizon.get(origin)
        return seq < 0 or (limit is not None and seq >= limit)

    def known(self, origin: int, seq: int) -> bool:
        self._check_origin(origin)
        if self.is_zero(origin, seq):
            return True
        return seq in self._data[origin] or seq < self._evicted_below[origin]

    def holds(self, origin: int, seq: int) -> bool:
        """True only for a real (non-zero-by-convention) message in the store."""
        return not self.is_zero(origin, seq) and seq in self._data[origin]

    def get(self, origin: int, seq: int) -> int:
        self._check_origin(origin)
        if self.is_zero(origin, seq):
            return 0
        entries = self._data[origin]
        if seq in entries:
            return entries[seq]
        if seq < self._evicted_below[origin]:
            raise ProtocolViolation(f"message {seq} of origin {origin} was evicted from the store")
        raise ProtocolViolation(
            f"message {seq} of origin {origin} is not decoded (watermark {self._watermark[origin]})"
        )

    def put(self, origin: int, seq: int, payload: int) -> bool:
        """Insert a message; returns False for a duplicate or a zero-by-convention index."""
        self._check_origin(origin)
        if self.is_zero(origin, seq) or self.known(origin, seq):
            return False
        entries = self._data[origin]
        entries[seq] = payload
        mark = self._watermark[origin]
        while mark + 1 in entries:
            mark += 1
        self._watermark[origin] = mark
        if self.retention is not None:
            floor = mark - self.retention
            if floor > self._evicted_below[origin]:
                for old in [g for g in entries if g < floor]:
                    del entries[old]
                self._evicted_below[origin] = floor
        return True

    def watermark(self, origin: int) -> int:
        self._check_origin(origin)
        return self._watermark[origin]

    def decoded(self, origin: int) -> list[int]:
        self._check_origin(origin)
        return sorted(self._data[origin])

    def __repr__(self) -> str:
        marks = ", ".join(f"{o}:{m}" for o, m in self._watermark.items())
        return f"<MessageStore(watermarks={{{marks}}})>"


# ---------------------------------------------------------------------------
# Coding trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CodingTree:
    """A coding block on wireless nodes.

    `links` are (u, v, wireless edge id) triples; `origins` are in header
    order. Leaves must be origins; origins may also sit inside the tree.
    """

    kind: str
    origins: tuple[int, ...]
    links: tuple[tuple[int, int, int | None], ...]

    def __post_init__(self):
        if self.kind not in (LINE_KIND, STAR_KIND, LINESTAR_KIND):
            raise ArgumentError(f"unknown block kind {self.kind!r}")
        want = 2 if self.kind == LINE_KIND else 3
        if len(self.origins) != want or len(set(self.origins)) != want:
            raise ArgumentError(f"{self.kind} block needs {want} distinct origins, got {self.origins}")
        g = self.graph
        if g.number_of_nodes() == 0 or not nx.is_tree(g):
            raise ArgumentError(f"{self.kind} block links do not form a tree: {self.links}")
        for o in self.origins:
            if o not in g:
                raise ArgumentError(f"origin {o} is not on the block")
        for n in g.nodes:
            if g.degree(n) == 1 and n not in self.origins:
                raise ArgumentError(f"leaf {n} of the block is not an origin")
        if self.kind == LINE_KIND and max(dict(g.degree).values()) > 2:
            raise ArgumentError("line block has a branching node")

    @classmethod
    def line(cls, nodes: Iterable[int], edge_ids: Iterable[int | None] | None = None) -> "CodingTree":
        seq = tuple(nodes)
        eids = tuple(edge_ids) if edge_ids is not None else (None,) * (len(seq) - 1)
        links = tuple((seq[k], seq[k + 1], eids[k]) for k in range(len(seq) - 1))
        return cls(LINE_KIND, (seq[0], seq[-1]), links)

    @classmethod
    def star(cls, center: int, leaves: Iterable[int], edge_ids: Iterable[int | None] | None = None) -> "CodingTree":
        leaves = tuple(leaves)
        eids = tuple(edge_ids) if edge_ids is not None else (None,) * len(leaves)
        return cls(STAR_KIND, tuple(sorted(leaves)), tuple((center, l, e) for l, e in zip(leaves, eids)))

    @classmethod
    def linestar(cls, arms: Iterable[Iterable[int]]) -> "CodingTree":
        """Arms are node sequences from each origin to the shared center."""
        arms = [tuple(a) for a in arms]
        links = []
        for arm in arms:
            links += [(arm[k], arm[k + 1], None) for k in range(len(arm) - 1)]
        return cls(LINESTAR_KIND, tuple(sorted(a[0] for a in arms)), tuple(links))

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        for u, v, eid in self.links:
            g.add_edge(u, v, eid=eid)
        return g

    @cached_property
    def nodes(self) -> tuple[int, ...]:
        return tuple(sorted(self.graph.nodes))

    @cached_property
    def _dist(self) -> dict[int, dict[int, int]]:
        return {o: dict(nx.single_source_shortest_path_length(self.graph, o)) for o in self.origins}

    def dist(self, n: int, origin: int) -> int:
        return self._dist[origin][n]

    def neighbors(self, n: int) -> list[int]:
        return sorted(self.graph.neighbors(n))

    def degree(self, n: int) -> int:
        return self.graph.degree(n)

    def edge_id(self, u: int, v: int) -> int | None:
        return self.graph[u][v]["eid"]

    def is_origin(self, n: int) -> bool:
        return n in self.origins

    def is_leaf(self, n: int) -> bool:
        return self.graph.degree(n) == 1

    @property
    def star_type(self) -> bool:
        return self.kind != LINE_KIND

    @property
    def period(self) -> int:
        """Slots per message of one origin (rate C or C/2)."""
        return 2 if self.star_type else 1

    @property
    def c(self) -> int:
        return 1 if self.star_type else 0

    @cached_property
    def L(self) -> int:
        return max(self.dist(a, b) for a in self.origins for b in self.origins if a != b)

    def upstream(self, receiver: int, sender: int, origin: int) -> bool:
        """True when origin lies on the receiver's side of the receiver-sender link."""
        return self.dist(receiver, origin) < self.dist(sender, origin)

    def relays(self) -> list[int]:
        return [n for n in self.nodes if not self.is_origin(n)]

    def __repr__(self) -> str:
        return f"<CodingTree(kind={self.kind}, origins={self.origins}, nodes={len(self.nodes)})>"


# ---------------------------------------------------------------------------
# Coefficients and closed forms
# ---------------------------------------------------------------------------

class TreeCode:
    """Coefficient assignment for one coding tree over one field."""

    def __init__(
        self,
        tree: CodingTree,
        gf: GaloisField,
        triplets: CoeffTriplets | None = None,
        line_coeffs: tuple[int, int] = (1, 1),
    ):
        self.tree = tree
        self.gf = gf
        if tree.star_type:
            self.triplets = triplets or choose_triplets(gf.bits)
            if self.triplets.bits != gf.bits:
                raise ArgumentError("coefficient triplets belong to a different field")
        else:
            self.triplets = None
            for k in line_coeffs:
                if not 0 < k < gf.order:
                    raise ArgumentError(f"line coefficient {k} must be a nonzero symbol")
        self.line_coeffs = tuple(line_coeffs)

    def coef(self, origin: int, phase: int) -> int:
        idx = self.tree.origins.index(origin)
        if self.triplets is None:
            return self.line_coeffs[idx]
        return self.triplets.for_phase(phase)[idx]

    def term(self, origin: int, s: int) -> tuple[int, int, int] | None:
        """(origin, seq, coef) of T_origin(s); None before the origin started."""
        if s < 0:
            return None
        if self.tree.star_type:
            return origin, s // 2, self.coef(origin, s % 2)
        return origin, s, self.coef(origin, 0)

    def closed_form_terms(self, n: int, t: int) -> list[tuple[int, int, int]]:
        out = []
        for o in self.tree.origins:
            term = self.term(o, t - self.tree.dist(n, o))
            if term is not None:
                out.append(term)
        return out

    def sent_terms(self, n: int, t: int) -> list[tuple[int, int, int]]:
        """Terms of the synchronized transmission X_n(t)."""
        if self.tree.kind == STAR_KIND and self.tree.is_origin(n):
            # pure-star sources also echo the other sources' older messages
            k = self.coef_set(t % 2)
            out = [(n, t // 2, k[n])]
            if t >= 3:
                out += [(o, (t - 3) // 2, k[o]) for o in self.tree.origins if o != n]
            return out
        return self.closed_form_terms(n, t)

    def coef_set(self, phase: int) -> dict[int, int]:
        return {o: self.coef(o, phase) for o in self.tree.origins}

    def evaluate(self, terms: Iterable[tuple[int, int, int]], messages: MessageSource) -> int:
        acc = 0
        for o, seq, k in terms:
            if seq >= 0:
                acc ^= self.gf.mul(k, messages(o, seq))
        return acc

    def closed_form(self, n: int, t: int, messages: MessageSource) -> int:
        return self.evaluate(self.closed_form_terms(n, t), messages)


def line_closed_form(r: int, t: int, M: int, coeffs: tuple[int, int], messages: MessageSource, gf: GaloisField) -> int:
    """k1*W1[t-(r-1)] + kM*WM[t-(M-r)] for position r on a line 1..M."""
    acc = 0
    for origin, seq, k in ((1, t - (r - 1), coeffs[0]), (M, t - (M - r), coeffs[1])):
        if seq >= 0:
            acc ^= gf.mul(k, messages(origin, seq))
    return acc


def star_relay_closed_form(t: int, triplets: CoeffTriplets, messages: MessageSource, gf: GaloisField) -> int:
    if t < 1:
        return 0
    k = triplets.for_phase((t - 1) % 2)
    g = (t - 1) // 2
    return gf.dot(k, [messages(o, g) for o in (1, 2, 3)])


def linestar_relay_closed_form(t: int, triplets: CoeffTriplets, messages: MessageSource, gf: GaloisField) -> int:
    """Relay between source 1 and the center of a line-star with sources 2, 3 at the center.

    Each term carries the coefficient of the slot it left its source.
    """
    acc = 0
    for idx, origin, s in ((0, 1, t - 1), (1, 2, t - 2), (2, 3, t - 2)):
        if s >= 0:
            acc ^= gf.mul(triplets.for_phase(s % 2)[idx], messages(origin, s // 2))
    return acc


# ---------------------------------------------------------------------------
# Synchronized encoders
# ---------------------------------------------------------------------------

def line_source_encode_sync(
    i: int,
    t: int,
    store: MessageStore,
    coeffs: tuple[int, int],
    M: int,
    gf: GaloisField,
    origins: tuple[int, int] | None = None,
) -> int:
    """Endpoint i in {1, M} of a line: k1*W1[t-(i-1)] + kM*WM[t-(M-i)].

    `origins` maps the endpoints to store keys (default 1 and M).
    """
    if i not in (1, M):
        raise ArgumentError(f"{i} is not an endpoint of a line with M={M}")
    first, last = origins or (1, M)
    acc = 0
    for origin, seq, k in ((first, t - (i - 1), coeffs[0]), (last, t - (M - i), coeffs[1])):
        if seq >= 0:
            acc ^= gf.mul(k, store.get(origin, seq))
    return acc


def line_relay_encode_sync(inputs: Iterable[int], own_prev2: int) -> int:
    """X_r(t) = X_{r-1}(t-1) + X_{r+1}(t-1) + X_r(t-2)."""
    acc = own_prev2
    for x in inputs:
        acc ^= x
    return acc


def star_source_encode(
    i: int,
    t: int,
    store: MessageStore,
    triplets: CoeffTriplets,
    gf: GaloisField,
    origins: tuple[int, int, int] = (1, 2, 3),
) -> int:
    """Own message of slot 2*floor(t/2) plus echoes of the others' 2*floor((t-3)/2)."""
    k = triplets.for_phase(t % 2)
    acc = gf.mul(k[origins.index(i)], store.get(i, t // 2))
    if t >= 3:
        for idx, o in enumerate(origins):
            if o != i:
                acc ^= gf.mul(k[idx], store.get(o, (t - 3) // 2))
    return acc


def star_relay_encode(inputs: Iterable[int]) -> int:
    acc = 0
    for x in inputs:
        acc ^= x
    return acc


def linestar_relay_encode_sync(inputs: Iterable[int], own_prev2: int) -> int:
    """Relay on a line-star arm: same rule as a line relay."""
    return line_relay_encode_sync(inputs, own_prev2)


class SyncNode:
    """One node of a coding tree in synchronized mode (all delays equal 1)."""

    def __init__(self, code: TreeCode, node: int, store: MessageStore | None = None, instant: bool = False):
        self.code = code
        self.tree = code.tree
        self.node = node
        self.store = store
        self.decoder = PeelingDecoder(code.gf, store, instant=instant) if store is not None else None
        self._history: dict[int, int] = {}

    def own(self, s: int) -> int:
        """T_node(s) from the node's own stored messages."""
        term = self.code.term(self.node, s)
        if term is None:
            return 0
        o, seq, k = term
        return self.code.gf.mul(k, self.store.get(o, seq))

    def encode(self, t: int, inputs: dict[int, int]) -> int:
        tree = self.tree
        n = self.node
        prev2 = self._history.get(t - 2, 0)
        received = [inputs.get(m, 0) for m in tree.neighbors(n)]
        even = tree.degree(n) % 2 == 0

        if not tree.is_origin(n):
            if tree.kind == STAR_KIND:
                x = star_relay_encode(received)
            elif tree.kind == LINESTAR_KIND:
                x = linestar_relay_encode_sync(received, prev2 if even else 0)
            else:
                x = line_relay_encode_sync(received, prev2 if even else 0)
        elif tree.kind == LINE_KIND and tree.is_leaf(n):
            M = tree.L + 1
            i = 1 if n == tree.origins[0] else M
            x = line_source_encode_sync(i, t, self.store, self.code.line_coeffs, M, self.code.gf, tree.origins)
        elif tree.kind == STAR_KIND:
            x = star_source_encode(n, t, self.store, self.code.triplets, self.code.gf, tree.origins)
        else:
            # reflect what arrived minus this node's own term two slots back
            x = line_relay_encode_sync(received, prev2 if even else 0)
            x ^= self.own(t) ^ self.own(t - 2)

        self._history[t] = x
        self._history.pop(t - 3, None)
        return x

    def receive(self, sender: int, t: int, payload: int, event_id: int | None = None) -> list[Message]:
        """Decode the neighbor's transmission X_sender(t - 1), received at slot t."""
        if self.decoder is None:
            return []
        terms = self.code.sent_terms(sender, t - 1)
        return self.decoder.add(terms, payload, event_id=event_id, period=self.tree.period)


def unroll_sync(code: TreeCode, T: int, messages: MessageSource) -> dict[int, list[int]]:
    """Run the synchronized recursion on every node of a tree for slots 0..T-1.

    Origins hold their own messages from `messages` and decode the rest; the
    return value maps node -> transmissions per slot.
    """
    tree = code.tree
    nodes = {}
    for n in tree.nodes:
        store = None
        if tree.is_origin(n):
            store = MessageStore(tree.origins)
        nodes[n] = SyncNode(code, n, store)
    out: dict[int, list[int]] = {n: [] for n in tree.nodes}
    for t in range(T):
        for n, sn in nodes.items():
            if sn.store is not None:
                if t % tree.period == 0:
                    sn.store.put(n, t // tree.period, messages(n, t // tree.period))
                if t > 0:
                    for m in tree.neighbors(n):
                        sn.receive(m, t, out[m][t - 1])
        for n, sn in nodes.items():
            inputs = {m: out[m][t - 1] for m in tree.neighbors(n)} if t > 0 else {}
            out[n].append(sn.encode(t, inputs))
    return out


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------

@dataclass
class Equation:
    terms: dict[tuple[int, int], int]
    value: int
    event_id: int | None = None

    def key(self) -> frozenset:
        return frozenset(self.terms)


@dataclass
class PeelingDecoder:
    """Solves received linear combinations against a MessageStore.

    One unknown is solved directly; two unknowns wait for a partner packet
    with the same unknowns and an independent coefficient pair. Buffered
    equations are revisited after every new decode.
    """

    gf: GaloisField
    store: MessageStore
    instant: bool = False
    pending: list[Equation] = field(default_factory=list)

    def add(self, terms: Iterable[tuple[int, int, int]], value: int, event_id: int | None = None, period: int = 1) -> list[Message]:
        merged: dict[tuple[int, int], int] = {}
        for o, seq, k in terms:
            merged[(o, seq)] = merged.get((o, seq), 0) ^ k
        eq = Equation({key: k for key, k in merged.items() if k}, value, event_id)
        decoded: list[tuple[int, int, int]] = []
        self._absorb(eq, decoded)
        if decoded:
            self._rescan(decoded)
        return [Message(o, seq * period, payload) for o, seq, payload in decoded]

    def _reduce(self, eq: Equation) -> Equation:
        for key in list(eq.terms):
            if self.store.known(*key):
                eq.value ^= self.gf.mul(eq.terms.pop(key), self.store.get(*key))
        return eq

    def _solved(self, key: tuple[int, int], payload: int, decoded: list):
        if self.store.put(key[0], key[1], payload):
            decoded.append((key[0], key[1], payload))
            dbg("   decoded", key, payload)

    def _absorb(self, eq: Equation, decoded: list):
        eq = self._reduce(eq)
        unknown = len(eq.terms)
        if unknown == 0:
            if eq.value != 0:
                raise ProtocolViolation("received combination disagrees with decoded messages", eq.event_id)
            return
        if unknown == 1:
            (key, k), = eq.terms.items()
            self._solved(key, self.gf.div(eq.value, k), decoded)
            return
        if self.instant:
            raise ProtocolViolation(f"packet needs joint decoding of {unknown} messages", eq.event_id)
        if unknown == 2:
            for other in self.pending:
                if other.key() != eq.key():
                    continue
                (k1, c11), (k2, c12) = sorted(eq.terms.items())
                c21, c22 = other.terms[k1], other.terms[k2]
                if self.gf.mul(c11, c22) ^ self.gf.mul(c12, c21):
                    self.pending.remove(other)
                    u, v = self.gf.solve2(c11, c12, c21, c22, eq.value, other.value)
                    self._solved(k1, u, decoded)
                    self._solved(k2, v, decoded)
                    return
        for other in self.pending:
            if other.terms == eq.terms and other.value == eq.value:
                return
        self.pending.append(eq)

    def _rescan(self, decoded: list):
        while True:
            before = len(decoded)
            waiting, self.pending = self.pending, []
            for eq in waiting:
                self._absorb(eq, decoded)
            if len(decoded) == before:
                return


# ---------------------------------------------------------------------------
# Unsynchronized encoders and decoders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Transmission:
    packet: Packet
    phase: int
    seqs: tuple[int, ...]


class AsyncNode:
    """One node of a coding tree with arbitrary delays in 1..D."""

    def __init__(
        self,
        code: TreeCode,
        node: int,
        store: MessageStore,
        D: int,
        block_id: int = 0,
        instant: bool | None = None,
    ):
        self.code = code
        self.tree = code.tree
        self.node = node
        self.store = store
        self.D = D
        self.block_id = block_id
        if instant is None:
            instant = not self.tree.star_type
        self.decoder = PeelingDecoder(code.gf, store, instant=instant)
        # last sequence number put on the air per origin; -1 means nothing yet
        self.pointer: dict[int, int] = {o: -1 for o in self.tree.origins}

    def advance(self):
        """Move every origin's pointer forward by at most one held message."""
        for o in self.tree.origins:
            if self.store.holds(o, self.pointer[o] + 1):
                self.pointer[o] += 1

    def phases(self, t: int) -> tuple[int, ...]:
        if not self.tree.star_type:
            return (0,)
        if self.tree.is_leaf(self.node):
            return (t % 2,)
        return (0, 1)

    def encode(self, phase: int) -> Transmission:
        seqs = tuple(self.pointer[o] for o in self.tree.origins)
        payload = 0
        for o, seq in zip(self.tree.origins, seqs):
            payload ^= self.code.gf.mul(self.code.coef(o, phase), self.store.get(o, seq))
        kind = STAR if self.tree.star_type else LINE
        header = make_header(kind, [wrap(s, self.D) for s in seqs], phase)
        return Transmission(Packet(header, self.block_id, payload), phase, seqs)

    def resolve(self, sender: int, header: LineHeader | StarHeader) -> list[int]:
        seqs = []
        for o, idx in zip(self.tree.origins, header.indices):
            if self.tree.upstream(self.node, sender, o):
                seqs.append(resolve_upstream(idx, self.pointer[o], self.D))
            else:
                seqs.append(resolve_downstream(idx, self.store.watermark(o), self.D))
        return seqs

    def receive(self, sender: int, pkt: Packet, event_id: int | None = None) -> list[Message]:
        if sender not in self.tree.neighbors(self.node):
            raise ProtocolViolation(f"node {self.node} got a packet from non-neighbor {sender}", event_id)
        phase = pkt.header.k if isinstance(pkt.header, StarHeader) else 0
        seqs = self.resolve(sender, pkt.header)
        terms = [(o, seq, self.code.coef(o, phase)) for o, seq in zip(self.tree.origins, seqs)]
        return self.decoder.add(terms, pkt.payload, event_id=event_id, period=self.tree.period)


def line_encode_async(node: AsyncNode) -> Packet:
    """k1*W1[p] + kM*WM[q] for the node's current forwarding pointers."""
    if node.tree.star_type:
        raise ArgumentError("line_encode_async on a star-type block")
    return node.encode(0).packet


def line_decode(node: AsyncNode, sender: int, pkt: Packet, event_id: int | None = None) -> list[Message]:
    """Peel the one unknown message of a line packet (instantly decodable)."""
    if not isinstance(pkt.header, LineHeader):
        raise ArgumentError("line_decode needs a LineHeader packet")
    return node.receive(sender, pkt, event_id)


def star_encode_async(node: AsyncNode, phase: int) -> Packet:
    """k1*W1[p] + k2*W2[q] + k3*W3[u] with coefficient set `phase`."""
    if not node.tree.star_type:
        raise ArgumentError("star_encode_async on a line block")
    return node.encode(phase).packet


def star_decode(node: AsyncNode, sender: int, pkts: Iterable[Packet], event_id: int | None = None) -> list[Message]:
    """Decode a packet pair (or single packets) from a star-type neighbor.

    Unmatched packets stay buffered in the node's decoder until their
    partner arrives.
    """
    out: list[Message] = []
    for pkt in pkts:
        if not isinstance(pkt.header, StarHeader):
            raise ArgumentError("star_decode needs StarHeader packets")
        out += node.receive(sender, pkt, event_id)
    return out
