from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest

from src.errors import ArgumentError, InfeasibleError, ParseError
from src.graph_core import (
    WiredNode,
    WirelessGraph,
    compute_metrics,
    cut_units,
    edge_disjoint_paths,
    min_cut,
    parse_graph,
    split_relays,
)
from tests.conftest import wired


def brute_cut(g, from_set, to_set) -> int:
    """Smallest number of active arcs leaving any node set that holds `from_set` but not `to_set`."""
    fixed_in = {WiredNode(s, False) for s in from_set}
    fixed_out = {WiredNode(s, False) for s in to_set}
    free = [n for n in g.nodes if n not in fixed_in and n not in fixed_out]
    best = None
    for r in range(len(free) + 1):
        for extra in combinations(free, r):
            side = fixed_in | set(extra)
            value = sum(1 for a in g.arcs if a.tail in side and a.head not in side)
            best = value if best is None else min(best, value)
    return best


def random_graph(seed: int, n: int = 6, p: float = 0.45):
    rng = np.random.default_rng(seed)
    edges = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1) if rng.random() < p]
    return wired(n, edges)


def test_split_two_sources_one_relay():
    g = split_relays(WirelessGraph.build(3, [(1, 3), (2, 3)], (1, 2)))
    assert set(g.nodes) == {WiredNode(1, False), WiredNode(2, False), WiredNode(3, False), WiredNode(3, True)}
    labels = sorted(a.label for a in g.arcs)
    assert labels == sorted(["1-3", "3'-1", "2-3", "3'-2", "3-3'"])


def test_split_without_relays_keeps_both_directions():
    g = wired(3, [(1, 2), (2, 3), (1, 3)])
    assert len(g.arcs) == 6
    assert not any(n.primed for n in g.nodes)
    assert not any(a.is_broadcast for a in g.arcs)


def test_split_line_has_one_broadcast_arc_per_relay():
    g = split_relays(WirelessGraph.build(5, [(1, 3), (3, 4), (4, 5), (5, 2)], (1, 2)))
    assert len(g.nodes) == 8
    assert sum(a.is_broadcast for a in g.arcs) == 3


def test_min_cut_examples(star, triangle):
    assert min_cut(star, [1], [2]) == 1
    assert cut_units(triangle, [1], [2, 3]) == 2
    disconnected = wired(4, [(1, 2), (3, 4)])
    assert cut_units(disconnected, [1], [3]) == 0


def test_min_cut_argument_errors(star):
    with pytest.raises(ArgumentError):
        cut_units(star, [1], [1, 2])
    with pytest.raises(ArgumentError):
        cut_units(star, [], [2])
    with pytest.raises(ArgumentError):
        cut_units(star, [4], [2])


def test_relay_broadcast_caps_the_cut():
    # two parallel edges into relay 4 cannot beat its single broadcast arc
    g = wired(4, [(1, 4), (1, 4), (2, 4), (3, 4)])
    assert cut_units(g, [1], [2, 3]) == 1


@pytest.mark.parametrize("seed", range(12))
def test_cuts_match_brute_force(seed):
    g = random_graph(seed)
    for i, j in ((1, 2), (2, 3), (3, 1)):
        assert cut_units(g, [i], [j]) == brute_cut(g, [i], [j])
    for i in (1, 2, 3):
        rest = [s for s in (1, 2, 3) if s != i]
        assert cut_units(g, [i], rest) == brute_cut(g, [i], rest)


def test_edge_disjoint_paths(unicast_graph):
    paths = edge_disjoint_paths(unicast_graph, 1, 3, 3)
    assert len(paths) == 3
    for a, b in combinations(paths, 2):
        assert not set(a) & set(b)
    for p in paths:
        nodes = unicast_graph.path_nodes(p)
        assert nodes[0] == 1 and nodes[-1] == 3
    assert edge_disjoint_paths(unicast_graph, 1, 3, 0) == []
    with pytest.raises(InfeasibleError):
        edge_disjoint_paths(unicast_graph, 1, 3, 4)


def test_line_path_is_unique():
    g = split_relays(WirelessGraph.build(4, [(1, 3), (3, 4), (4, 2)], (1, 2)))
    (path,) = edge_disjoint_paths(g, 1, 2, 1)
    assert g.path_nodes(path) == (1, 3, 4, 2)


def test_metrics_report_unicast_cuts(unicast_graph):
    m = compute_metrics(unicast_graph)
    assert m.cut([1], [3]) == 3
    assert m.cut([1], [2, 3]) == 5
    assert m.single_source_cut(3) == 3
    assert m.h == 2
    assert m.max_distance == 2


def test_parse_graph_round_trip_and_errors():
    text = "# relay star\nnodes 4 sources 1,2,3 capacity 8\nedge 1 4\nedge 2 4 2\nedge 3 4\n"
    g = parse_graph(text)
    assert g.capacity == 8
    assert g.edges == ((1, 4), (2, 4), (2, 4), (3, 4))
    assert parse_graph(g.to_text()) == g
    assert parse_graph(text, sources=[1, 2]).sources == (1, 2)

    with pytest.raises(ParseError) as err:
        parse_graph("nodes 3 sources 1,2 capacity 1\nedge 1 1\n")
    assert err.value.line_no == 2
    with pytest.raises(ParseError) as err:
        parse_graph("nodes 3 sources 1,2 capacity 1\nedge 1 x\n")
    assert err.value.line_no == 2
    with pytest.raises(ParseError):
        parse_graph("edge 1 2\n")
