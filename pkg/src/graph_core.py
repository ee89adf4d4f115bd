# src/graph_core.py
# --------------------------------------------
# Wireless graphs, the relay-splitting transform, max-flow/min-cut and the
# path families every other module is built on.
#
# Cut values come in two flavours: `cut_units` counts disjoint paths (the cut
# divided by C) and `min_cut` returns the cut in bits per slot (units * C).

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, NamedTuple

import networkx as nx

from src.errors import ArgumentError, InfeasibleError, ParseError


class WiredNode(NamedTuple):
    node: int
    primed: bool = False

    @property
    def label(self) -> str:
        return f"{self.node}'" if self.primed else str(self.node)


SUPER_SOURCE = WiredNode(0, False)
SUPER_SINK = WiredNode(-1, False)


@dataclass(frozen=True)
class WirelessGraph:
    """Undirected wireless network; edge ids are positions in `edges`."""

    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    sources: tuple[int, ...]
    capacity: int = 1

    def __post_init__(self):
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise ArgumentError("duplicate node ids")
        if self.capacity <= 0:
            raise ArgumentError(f"capacity must be positive, got {self.capacity}")
        for eid, (u, v) in enumerate(self.edges):
            if u == v:
                raise ArgumentError(f"edge {eid} is a self-loop on node {u}")
            if u not in node_set or v not in node_set:
                raise ArgumentError(f"edge {eid} ({u},{v}) references an undeclared node")
        if len(set(self.sources)) != len(self.sources):
            raise ArgumentError("duplicate source ids")
        for s in self.sources:
            if s not in node_set:
                raise ArgumentError(f"source {s} is not a declared node")
        if len(self.sources) < 2:
            raise ArgumentError("at least two sources are required")

    @classmethod
    def build(cls, n_nodes: int, edges: Iterable[tuple[int, int]], sources: Iterable[int], capacity: int = 1):
        ordered = tuple((min(u, v), max(u, v)) if u != v else (u, v) for u, v in edges)
        return cls(tuple(range(1, n_nodes + 1)), ordered, tuple(sources), capacity)

    @cached_property
    def relays(self) -> tuple[int, ...]:
        src = set(self.sources)
        return tuple(n for n in self.nodes if n not in src)

    def is_source(self, n: int) -> bool:
        return n in self.sources

    def degree(self, n: int) -> int:
        return sum((u == n) + (v == n) for u, v in self.edges)

    def neighbors(self, n: int) -> list[int]:
        out = []
        for u, v in self.edges:
            if u == n:
                out.append(v)
            elif v == n:
                out.append(u)
        return sorted(set(out))

    def to_text(self) -> str:
        lines = [
            f"nodes {len(self.nodes)} sources {','.join(map(str, self.sources))} capacity {self.capacity}"
        ]
        lines += [f"edge {u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return f"<WirelessGraph(nodes={len(self.nodes)}, edges={len(self.edges)}, sources={self.sources})>"


def parse_graph(text: str, sources: Iterable[int] | None = None) -> WirelessGraph:
    """Parse the graph text format.

    Header `nodes M sources a,b[,c] capacity C`, then `edge u v [multiplicity]`
    records; `#` starts a comment. `sources` overrides the header's list.
    """
    header = None
    edges: list[tuple[int, int]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "nodes":
                if header is not None:
                    raise ParseError("duplicate header", line_no)
                if len(parts) != 6 or parts[2] != "sources" or parts[4] != "capacity":
                    raise ParseError("expected 'nodes M sources a,b[,c] capacity C'", line_no)
                header = (int(parts[1]), tuple(int(s) for s in parts[3].split(",")), int(parts[5]), line_no)
            elif parts[0] == "edge":
                if header is None:
                    raise ParseError("edge record before the header", line_no)
                if len(parts) not in (3, 4):
                    raise ParseError("expected 'edge u v [multiplicity]'", line_no)
                u, v = int(parts[1]), int(parts[2])
                mult = int(parts[3]) if len(parts) == 4 else 1
                if mult < 1:
                    raise ParseError(f"multiplicity must be >= 1, got {mult}", line_no)
                if u == v:
                    raise ParseError(f"self-loop on node {u}", line_no)
                for n in (u, v):
                    if not 1 <= n <= header[0]:
                        raise ParseError(f"node {n} outside 1..{header[0]}", line_no)
                edges.extend([(min(u, v), max(u, v))] * mult)
            else:
                raise ParseError(f"unknown record {parts[0]!r}", line_no)
        except ValueError:
            raise ParseError(f"malformed number in {line!r}", line_no)

    if header is None:
        raise ParseError("missing 'nodes' header", 1)
    n_nodes, header_sources, capacity, header_line = header
    chosen = tuple(sources) if sources is not None else header_sources
    try:
        return WirelessGraph.build(n_nodes, edges, chosen, capacity)
    except ArgumentError as exc:
        raise ParseError(str(exc), header_line)


@dataclass(frozen=True)
class WiredArc:
    id: int
    tail: WiredNode
    head: WiredNode
    origin: int | None  # wireless edge id; None for a relay's broadcast arc

    @property
    def is_broadcast(self) -> bool:
        return self.origin is None

    @property
    def label(self) -> str:
        return f"{self.tail.label}-{self.head.label}"


@dataclass(frozen=True)
class WiredGraph:
    """Directed graph after relay splitting.

    `all_arcs` is the full split; `active` restricts it to a residual graph so
    arc ids stay stable while blocks are carved out.
    """

    wireless: WirelessGraph
    all_arcs: tuple[WiredArc, ...]
    active: frozenset[int] = field(default=frozenset())

    @property
    def sources(self) -> tuple[int, ...]:
        return self.wireless.sources

    @property
    def capacity(self) -> int:
        return self.wireless.capacity

    @cached_property
    def arcs(self) -> tuple[WiredArc, ...]:
        return tuple(a for a in self.all_arcs if a.id in self.active)

    @cached_property
    def nodes(self) -> tuple[WiredNode, ...]:
        out = []
        for n in self.wireless.nodes:
            out.append(WiredNode(n, False))
            if not self.wireless.is_source(n):
                out.append(WiredNode(n, True))
        return tuple(out)

    def arc(self, arc_id: int) -> WiredArc:
        return self.all_arcs[arc_id]

    def out_node(self, n: int) -> WiredNode:
        return WiredNode(n, not self.wireless.is_source(n))

    def in_node(self, n: int) -> WiredNode:
        return WiredNode(n, False)

    def without(self, arc_ids: Iterable[int]) -> "WiredGraph":
        return WiredGraph(self.wireless, self.all_arcs, self.active - frozenset(arc_ids))

    def restricted_to(self, arc_ids: Iterable[int]) -> "WiredGraph":
        return WiredGraph(self.wireless, self.all_arcs, self.active & frozenset(arc_ids))

    def closure(self, arc_ids: Iterable[int]) -> frozenset[int]:
        """Every arc a block occupies once it uses `arc_ids` in both directions.

        Both directions of each wireless edge touched plus the broadcast arc of
        each relay touched.
        """
        origins: set[int] = set()
        relays: set[int] = set()
        for aid in arc_ids:
            a = self.all_arcs[aid]
            if a.origin is not None:
                origins.add(a.origin)
            for end in (a.tail, a.head):
                if not self.wireless.is_source(end.node):
                    relays.add(end.node)
        return frozenset(
            a.id
            for a in self.all_arcs
            if (a.origin is not None and a.origin in origins)
            or (a.origin is None and a.tail.node in relays)
        )

    def wireless_edges(self, arc_ids: Iterable[int]) -> tuple[int, ...]:
        return tuple(sorted({self.all_arcs[a].origin for a in arc_ids if self.all_arcs[a].origin is not None}))

    def path_nodes(self, path: Iterable[int]) -> tuple[int, ...]:
        """Wireless node sequence visited by a wired path (broadcast arcs collapse)."""
        seq: list[int] = []
        for aid in path:
            a = self.all_arcs[aid]
            if not seq:
                seq.append(a.tail.node)
            if a.origin is not None:
                seq.append(a.head.node)
        return tuple(seq)

    def flow_graph(self) -> nx.DiGraph:
        """Aggregated digraph: capacity of (u, v) = number of active parallel arcs.

        Wireless arcs weigh one hop, broadcast arcs nothing.
        """
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        for a in self.arcs:
            if g.has_edge(a.tail, a.head):
                g[a.tail][a.head]["capacity"] += 1
            else:
                g.add_edge(a.tail, a.head, capacity=1, weight=0 if a.is_broadcast else 1)
        return g

    def to_text(self) -> str:
        lines = [f"# wired graph: {len(self.nodes)} nodes, {len(self.arcs)} arcs, capacity {self.capacity}"]
        for a in self.arcs:
            origin = "-" if a.origin is None else str(a.origin)
            lines.append(f"arc {a.id} {a.tail.label} {a.head.label} origin {origin}")
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return f"<WiredGraph(nodes={len(self.nodes)}, arcs={len(self.arcs)}, sources={self.sources})>"


def split_relays(g: WirelessGraph) -> WiredGraph:
    arcs: list[WiredArc] = []

    def out_of(n: int) -> WiredNode:
        return WiredNode(n, not g.is_source(n))

    for eid, (u, v) in enumerate(g.edges):
        arcs.append(WiredArc(len(arcs), out_of(u), WiredNode(v, False), eid))
        arcs.append(WiredArc(len(arcs), out_of(v), WiredNode(u, False), eid))
    for r in sorted(g.relays):
        arcs.append(WiredArc(len(arcs), WiredNode(r, False), WiredNode(r, True), None))
    return WiredGraph(g, tuple(arcs), frozenset(a.id for a in arcs))


def _source_set(g: WiredGraph, group: Iterable[int], name: str) -> frozenset[int]:
    members = frozenset([group] if isinstance(group, int) else group)
    if not members:
        raise ArgumentError(f"{name} source set is empty")
    for s in members:
        if s not in g.sources:
            raise ArgumentError(f"{s} in {name} set is not a source")
    return members


def max_flow_arcs(g: WiredGraph, from_set: Iterable[int], to_set: Iterable[int]) -> tuple[int, dict[int, int]]:
    """Integral max-flow between source sets; returns (units, {arc_id: 0/1}).

    Among maximum flows the one with the fewest wireless hops is taken, so the
    support carries no circulation. Aggregated flow on parallel arcs is
    handed to the lowest arc ids first.
    """
    src = _source_set(g, from_set, "from")
    dst = _source_set(g, to_set, "to")
    if src & dst:
        raise ArgumentError(f"source sets overlap: {sorted(src & dst)}")

    fg = g.flow_graph()
    fg.add_node(SUPER_SOURCE)
    fg.add_node(SUPER_SINK)
    # super arcs carry no capacity attribute, i.e. unbounded
    for s in sorted(src):
        fg.add_edge(SUPER_SOURCE, WiredNode(s, False), weight=0)
    for t in sorted(dst):
        fg.add_edge(WiredNode(t, False), SUPER_SINK, weight=0)

    flow = nx.max_flow_min_cost(fg, SUPER_SOURCE, SUPER_SINK)
    value = sum(flow[SUPER_SOURCE].values())

    per_arc: dict[int, int] = {}
    remaining = {}
    for a in g.arcs:
        key = (a.tail, a.head)
        if key not in remaining:
            remaining[key] = int(flow.get(a.tail, {}).get(a.head, 0))
        used = 1 if remaining[key] > 0 else 0
        remaining[key] -= used
        per_arc[a.id] = used
    return int(value), per_arc


def cut_units(g: WiredGraph, from_set: Iterable[int], to_set: Iterable[int]) -> int:
    return max_flow_arcs(g, from_set, to_set)[0]


def min_cut(g: WiredGraph, from_set: Iterable[int], to_set: Iterable[int]) -> int:
    """Minimum cut between source sets in bits per slot (a multiple of C)."""
    return cut_units(g, from_set, to_set) * g.capacity


def strip_paths(g: WiredGraph, flow: dict[int, int], starts: Iterable[WiredNode], ends: Iterable[WiredNode]) -> list[tuple[int, ...]]:
    """Decompose a unit arc flow into simple paths from `starts` to `ends`.

    Each step follows the lowest-id arc still carrying flow; walks that close a
    cycle drop it, so the result is deterministic and every path is simple.
    """
    left = {aid: f for aid, f in flow.items() if f > 0}
    out_arcs: dict[WiredNode, list[int]] = {}
    for aid in sorted(left):
        out_arcs.setdefault(g.all_arcs[aid].tail, []).append(aid)
    end_set = set(ends)

    def next_arc(node: WiredNode) -> int | None:
        for aid in out_arcs.get(node, []):
            if left.get(aid, 0) > 0:
                return aid
        return None

    paths: list[tuple[int, ...]] = []
    for start in starts:
        while True:
            walk: list[int] = []
            position = {start: 0}
            node = start
            while node not in end_set:
                aid = next_arc(node)
                if aid is None:
                    break
                walk.append(aid)
                left[aid] -= 1
                node = g.all_arcs[aid].head
                if node in position:
                    # closed a cycle: its arcs are a circulation, drop them
                    cut = position[node]
                    for dropped in walk[cut:]:
                        position.pop(g.all_arcs[dropped].head, None)
                    del walk[cut:]
                position[node] = len(walk)
            if walk and node in end_set:
                paths.append(tuple(walk))
                continue
            for aid in walk:
                left[aid] += 1
            break
    return paths


def edge_disjoint_paths(g: WiredGraph, s: int, t: int, k: int | None = None) -> list[tuple[int, ...]]:
    """k pairwise arc-disjoint s→t paths (all of them when k is None)."""
    value, flow = max_flow_arcs(g, [s], [t])
    if k is None:
        k = value
    if k < 0:
        raise ArgumentError(f"k must be nonnegative, got {k}")
    if k > value:
        raise InfeasibleError(f"requested {k} disjoint paths but min-cut({s};{t}) is {value}")
    if k == 0:
        return []
    paths = strip_paths(g, flow, [WiredNode(s, False)], [WiredNode(t, False)])
    return paths[:k]


def hop_length(g: WiredGraph, path: Iterable[int]) -> int:
    return sum(1 for aid in path if not g.all_arcs[aid].is_broadcast)


@dataclass(frozen=True)
class GraphMetrics:
    """Cut values in units of C, keyed by (from-set, to-set)."""

    min_cuts: dict[tuple[frozenset, frozenset], int]
    max_distance: int
    h: int
    capacity: int
    sources: tuple[int, ...] = ()

    def cut(self, from_set: Iterable[int], to_set: Iterable[int]) -> int:
        key = (frozenset([from_set] if isinstance(from_set, int) else from_set),
               frozenset([to_set] if isinstance(to_set, int) else to_set))
        return self.min_cuts[key]

    def single_source_cut(self, i: int) -> int:
        return self.min_cuts[(frozenset([i]), frozenset(self.sources) - {i})]


def compute_metrics(g: WiredGraph) -> GraphMetrics:
    sources = tuple(sorted(g.sources))
    cuts: dict[tuple[frozenset, frozenset], int] = {}
    for i, j in combinations(sources, 2):
        for a, b in ((i, j), (j, i)):
            cuts[(frozenset([a]), frozenset([b]))] = cut_units(g, [a], [b])
    for i in sources:
        rest = frozenset(sources) - {i}
        cuts[(frozenset([i]), rest)] = cut_units(g, [i], rest)
        cuts[(rest, frozenset([i]))] = cut_units(g, rest, [i])

    h = min(cuts[(frozenset([i]), frozenset(sources) - {i})] for i in sources)

    longest = 0
    for i, j in combinations(sources, 2):
        for a, b in ((i, j), (j, i)):
            for path in edge_disjoint_paths(g, a, b):
                longest = max(longest, hop_length(g, path))
    return GraphMetrics(min_cuts=cuts, max_distance=longest, h=h, capacity=g.capacity, sources=sources)
