from __future__ import annotations

import os
import tempfile

import pytest

# the API tests need a throwaway database before src.db is first imported
os.environ.setdefault("DATABASE_URL", f"sqlite:///{tempfile.mkdtemp(prefix='rtnc-')}/runs.db")

from src.graph_core import WirelessGraph, split_relays


def wired(n_nodes, edges, sources=(1, 2, 3), capacity=1):
    return split_relays(WirelessGraph.build(n_nodes, edges, sources, capacity))


@pytest.fixture
def triangle():
    """Three sources connected pairwise: one ring."""
    return wired(3, [(1, 2), (2, 3), (1, 3)])


@pytest.fixture
def star():
    return wired(4, [(1, 4), (2, 4), (3, 4)])


@pytest.fixture
def star_plus_edge():
    """Star on relay 4 plus a direct 1-2 edge left over for unicast."""
    return wired(4, [(1, 4), (2, 4), (3, 4), (1, 2)])


@pytest.fixture
def two_relay_graph():
    """Relay 4 adjacent to every source, relay 5 adjacent to 1 and 3: no ring, h = 1."""
    return wired(5, [(1, 4), (2, 4), (3, 4), (1, 5), (3, 5)])


@pytest.fixture
def ring_and_star():
    """Triangle of sources plus a relay hub: h = 3."""
    return wired(4, [(1, 2), (2, 3), (1, 3), (1, 4), (2, 4), (3, 4)])


@pytest.fixture
def unicast_graph():
    """cut(1;3) = 3, cut(1;2,3) = 5, cut(3;1,2) = 3."""
    return wired(4, [(1, 3), (1, 3), (1, 4), (3, 4), (1, 2), (1, 2)])
