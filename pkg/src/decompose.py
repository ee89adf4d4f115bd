# src/decompose.py
# --------------------------------------------
# Carves a wired graph into coding blocks:
#   - rings and line-stars for the 3-source multicast session,
#   - edge-disjoint path families for multiple-unicast corner points,
#   - combined multicast + residual unicast corners.
#
# Blocks are kept apart by `WiredGraph.closure`: a block owns both directions
# of every wireless edge it touches and the broadcast arc of each relay on it.
# Binary flow problems are solved with scipy's HiGHS interface (milp, or a
# linprog relaxation above the exact budget).

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Iterable

import networkx as nx
import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from src.codec import LINESTAR_KIND, STAR_KIND, CodingTree
from src.config import EXACT_EDGE_BUDGET, MILP_NODE_LIMIT, PACKING_NODE_LIMIT, RING_SEARCH_BUDGET, dbg
from src.errors import ArgumentError, DecompositionError, InfeasibleError, ParseError
from src.graph_core import (
    SUPER_SINK,
    WiredGraph,
    WiredNode,
    compute_metrics,
    cut_units,
    edge_disjoint_paths,
    max_flow_arcs,
    strip_paths,
)


# ---------------------------------------------------------------------------
# Binary flow problems
# ---------------------------------------------------------------------------

FlowTerm = tuple[int, str, int]  # (coefficient, "in" | "out", wireless node)


@dataclass(frozen=True)
class FlowConstraint:
    id: str
    terms: tuple[FlowTerm, ...]
    rhs: int


def fix(side: str, node: int, value: int) -> FlowConstraint:
    """I_node = value (side "in") or O_node = value (side "out")."""
    return FlowConstraint(f"{'I' if side == 'in' else 'O'}[{node}]={value}", ((1, side, node),), value)


@dataclass
class BinaryFlowProblem:
    """One binary variable per active wired arc.

    Relay halves always conserve flow; everything else is in `constraints`.
    The objective is a linear function of node in/out flows; `flow_weight`
    adds a penalty on the total number of arcs used (a minimum-flow
    objective when the node objective is empty).
    """

    graph: WiredGraph
    constraints: list[FlowConstraint]
    objective: tuple[FlowTerm, ...] = ()
    sense: str = "max"
    flow_weight: float = 0.0

    def __post_init__(self):
        if self.sense not in ("max", "min"):
            raise ArgumentError(f"sense must be 'max' or 'min', got {self.sense!r}")


@dataclass(frozen=True)
class FlowSolution:
    flow: dict[int, int]
    objective: int
    exact: bool

    def support(self) -> frozenset[int]:
        return frozenset(a for a, f in self.flow.items() if f)


@dataclass
class SolverStats:
    """Collects whether every binary-flow solve of a pipeline was exact."""

    exact: bool = True
    solves: int = 0

    def record(self, sol: FlowSolution):
        self.solves += 1
        self.exact = self.exact and sol.exact


def _arc_row(g: WiredGraph, index: dict[int, int], side: str, node: int) -> dict[int, int]:
    row: dict[int, int] = {}
    if side == "in":
        target = WiredNode(node, False)
        for a in g.arcs:
            if a.head == target:
                row[index[a.id]] = row.get(index[a.id], 0) + 1
    else:
        target = g.out_node(node)
        for a in g.arcs:
            if a.tail == target:
                row[index[a.id]] = row.get(index[a.id], 0) + 1
    return row


def _linear(g: WiredGraph, index: dict[int, int], terms: Iterable[FlowTerm]) -> dict[int, int]:
    out: dict[int, int] = {}
    for coef, side, node in terms:
        for col, v in _arc_row(g, index, side, node).items():
            out[col] = out.get(col, 0) + coef * v
    return out


def _system(p: BinaryFlowProblem, skip: int | None = None):
    g = p.graph
    arcs = g.arcs
    index = {a.id: k for k, a in enumerate(arcs)}
    rows: list[dict[int, int]] = []
    rhs: list[int] = []
    for k, con in enumerate(p.constraints):
        if k == skip:
            continue
        rows.append(_linear(g, index, con.terms))
        rhs.append(con.rhs)
    for r in g.wireless.relays:
        broadcast = [a for a in arcs if a.is_broadcast and a.tail.node == r]
        row_in = _arc_row(g, index, "in", r)
        row_out = _arc_row(g, index, "out", r)
        if broadcast:
            col = index[broadcast[0].id]
            row_in[col] = row_in.get(col, 0) - 1
            row_out = {c: -v for c, v in row_out.items()}
            row_out[col] = row_out.get(col, 0) + 1
            rows += [row_in, row_out]
            rhs += [0, 0]
        else:
            # relay without its broadcast arc: nothing may enter or leave it
            rows.append({c: 1 for c in set(row_in) | set(row_out)})
            rhs.append(0)

    A = sparse.lil_matrix((len(rows), len(arcs)), dtype=float)
    for i, row in enumerate(rows):
        for col, v in row.items():
            if v:
                A[i, col] = v
    sign = -1.0 if p.sense == "max" else 1.0
    c = np.zeros(len(arcs))
    for col, v in _linear(g, index, p.objective).items():
        c[col] += sign * v
    c += p.flow_weight
    return arcs, A.tocsr(), np.asarray(rhs, dtype=float), c


def _integral(x: np.ndarray) -> bool:
    return bool(np.all(np.abs(x - np.round(x)) < 1e-6))


def _run(p: BinaryFlowProblem, edge_budget: int, skip: int | None = None) -> tuple[np.ndarray | None, bool]:
    arcs, A, b, c = _system(p, skip)
    n = len(arcs)
    if n == 0:
        return (np.zeros(0), True) if np.all(b == 0) else (None, True)
    constraints = LinearConstraint(A, b, b) if A.shape[0] else None
    if n <= edge_budget:
        res = milp(c, integrality=np.ones(n), bounds=Bounds(0, 1), constraints=constraints)
        if res.status == 0:
            return np.round(res.x), True
        if res.status == 2:
            return None, True
        raise InfeasibleError(f"binary flow solver stopped: {res.message}")

    res = linprog(c, A_eq=A if A.shape[0] else None, b_eq=b if A.shape[0] else None, bounds=(0, 1), method="highs")
    if res.status == 2:
        return None, True
    if res.status == 0 and _integral(res.x):
        return np.round(res.x), True
    dbg("   relaxation is fractional; falling back to node-limited branch and bound")
    res = milp(
        c,
        integrality=np.ones(n),
        bounds=Bounds(0, 1),
        constraints=constraints,
        options={"node_limit": MILP_NODE_LIMIT, "presolve": True},
    )
    if res.x is None:
        if res.status == 2:
            return None, True
        raise InfeasibleError(f"binary flow heuristic found no solution: {res.message}")
    return np.round(res.x), res.status == 0


def solve_binary_flow(p: BinaryFlowProblem, edge_budget: int | None = None) -> FlowSolution:
    """Exact 0/1 arc flow via branch and bound up to `edge_budget` arcs.

    Larger problems try the LP relaxation first (accepted when integral),
    then a node-limited branch and bound; a result cut off by the node
    limit is flagged inexact.
    Infeasible problems raise InfeasibleError naming the first declared
    constraint whose removal restores feasibility.
    """
    budget = EXACT_EDGE_BUDGET if edge_budget is None else edge_budget
    x, exact = _run(p, budget)
    if x is None:
        for k, con in enumerate(p.constraints):
            relaxed, _ = _run(p, budget, skip=k)
            if relaxed is not None:
                raise InfeasibleError(f"binary flow infeasible; constraint {con.id} cannot be met", constraint_id=con.id)
        raise InfeasibleError("binary flow infeasible under relay conservation alone", constraint_id="conservation")

    arcs = p.graph.arcs
    flow = {a.id: int(x[k]) for k, a in enumerate(arcs)}
    index = {a.id: k for k, a in enumerate(arcs)}
    value = sum(v * x[col] for col, v in _linear(p.graph, index, p.objective).items())
    return FlowSolution(flow=flow, objective=int(round(value)), exact=exact)


def node_flow(g: WiredGraph, flow: dict[int, int], side: str, node: int) -> int:
    if side == "in":
        target = WiredNode(node, False)
        return sum(f for aid, f in flow.items() if g.arc(aid).head == target)
    target = g.out_node(node)
    return sum(f for aid, f in flow.items() if g.arc(aid).tail == target)


def remove_cyclic_flow(g: WiredGraph, flow: dict[int, int], protected: Iterable[int] | None = None) -> dict[int, int]:
    """Cancel directed cycles of the flow support that avoid protected sources."""
    guard = {WiredNode(s, False) for s in (g.sources if protected is None else protected)}
    out = dict(flow)
    while True:
        support = nx.MultiDiGraph()
        for aid in sorted(out):
            if out[aid] <= 0:
                continue
            a = g.arc(aid)
            if a.tail in guard or a.head in guard:
                continue
            support.add_edge(a.tail, a.head, key=aid)
        try:
            cycle = nx.find_cycle(support)
        except nx.NetworkXNoCycle:
            return out
        for _, _, aid in cycle:
            out[aid] = 0


# ---------------------------------------------------------------------------
# Blocks and decompositions
# ---------------------------------------------------------------------------

RING = "ring"
LINESTAR = "linestar"
LINE = "line"


def _links(g: WiredGraph, path: Iterable[int]) -> list[tuple[int, int, int]]:
    out = []
    for aid in path:
        a = g.arc(aid)
        if a.origin is not None:
            out.append((a.tail.node, a.head.node, a.origin))
    return out


def _line_tree(g: WiredGraph, path: tuple[int, ...]) -> CodingTree:
    return CodingTree.line(g.path_nodes(path), [e for _, _, e in _links(g, path)])


@dataclass(frozen=True)
class Block:
    id: int
    kind: str
    paths: tuple[tuple[int, ...], ...]
    arcs: frozenset[int]
    trees: tuple[CodingTree, ...]

    @property
    def sources(self) -> tuple[int, ...]:
        return tuple(sorted({o for t in self.trees for o in t.origins}))

    def edges(self, g: WiredGraph) -> tuple[int, ...]:
        return g.wireless_edges(self.arcs)

    def with_id(self, block_id: int) -> "Block":
        return Block(block_id, self.kind, self.paths, self.arcs, self.trees)


def ring_block(g: WiredGraph, paths: Iterable[tuple[int, ...]], block_id: int = 0) -> Block:
    paths = tuple(paths)
    arcs = frozenset().union(*(g.closure(p) for p in paths))
    return Block(block_id, RING, paths, arcs, tuple(_line_tree(g, p) for p in paths))


def line_block(g: WiredGraph, path: tuple[int, ...], block_id: int = 0) -> Block:
    return Block(block_id, LINE, (path,), g.closure(path), (_line_tree(g, path),))


def linestar_block(g: WiredGraph, p_ij: tuple[int, ...], p_il: tuple[int, ...], block_id: int = 0) -> Block:
    """P_ij plus the part of P_il after its last node on P_ij."""
    on_main = set(g.path_nodes(p_ij))
    cut = 0
    for k, aid in enumerate(p_il):
        a = g.arc(aid)
        if a.origin is not None and a.head.node in on_main:
            cut = k + 1
    suffix = tuple(aid for aid in p_il[cut:])
    used = p_ij + suffix
    links = _links(g, p_ij) + _links(g, suffix)
    i, j = g.path_nodes(p_ij)[0], g.path_nodes(p_ij)[-1]
    l = g.path_nodes(p_il)[-1]
    origins = tuple(sorted((i, j, l)))
    probe = CodingTree(LINESTAR_KIND, origins, tuple(links))
    kind = LINESTAR_KIND
    if len(probe.nodes) == 4 and all(probe.is_leaf(o) for o in origins):
        kind = STAR_KIND
    tree = CodingTree(kind, origins, tuple(links))
    return Block(block_id, LINESTAR, (p_ij, suffix), g.closure(used), (tree,))


@dataclass(frozen=True)
class Decomposition:
    graph: WiredGraph
    rings: tuple[Block, ...]
    linestars: tuple[Block, ...]
    lines: tuple[Block, ...] = ()
    h: int = 0
    exact: bool = True

    @property
    def blocks(self) -> tuple[Block, ...]:
        return self.rings + self.linestars + self.lines

    @property
    def leftover(self) -> frozenset[int]:
        used = frozenset().union(*(b.arcs for b in self.blocks)) if self.blocks else frozenset()
        return frozenset(a.id for a in self.graph.arcs) - used

    @property
    def header_blocks(self) -> int:
        return max(self.h, len(self.rings) + len(self.linestars), 1)

    def __repr__(self) -> str:
        return f"<Decomposition(rings={len(self.rings)}, linestars={len(self.linestars)}, lines={len(self.lines)}, h={self.h})>"


def _third(sources: tuple[int, ...], i: int, j: int) -> int:
    (l,) = [s for s in sources if s not in (i, j)]
    return l


def _need_three(g: WiredGraph):
    if len(g.sources) != 3:
        raise ArgumentError(f"decomposition needs exactly 3 sources, got {g.sources}")


# ---------------------------------------------------------------------------
# Rings (Algorithm 1)
# ---------------------------------------------------------------------------

def ring_problem(g: WiredGraph, i: int, j: int) -> BinaryFlowProblem:
    """Full-cut flow into l from {i, j} that carries as much i -> j flow as possible."""
    l = _third(g.sources, i, j)
    need = cut_units(g, [i, j], [l])
    return BinaryFlowProblem(
        graph=g,
        constraints=[
            fix("in", l, need),
            fix("in", i, 0),
            fix("out", l, 0),
            FlowConstraint(
                f"O[{i}]+O[{j}]=I[{j}]+I[{l}]",
                ((1, "out", i), (1, "out", j), (-1, "in", j), (-1, "in", l)),
                0,
            ),
        ],
        objective=((1, "in", j), (-1, "out", j)),
        sense="max",
        flow_weight=1.0 / (len(g.arcs) + 1),
    )


def ring_grade_paths(g: WiredGraph, i: int, j: int, edge_budget: int | None = None, stats: SolverStats | None = None) -> list[tuple[int, ...]]:
    """i -> j paths whose removal keeps the third source's full cut."""
    l = _third(g.sources, i, j)
    need = cut_units(g, [l], [i, j])
    try:
        sol = solve_binary_flow(ring_problem(g, i, j), edge_budget)
    except InfeasibleError:
        return []
    if stats is not None:
        stats.record(sol)
    flow = remove_cyclic_flow(g, sol.flow)
    if node_flow(g, flow, "in", j) == 0:
        return []
    support = g.restricted_to(a for a, f in flow.items() if f)
    _, pf = max_flow_arcs(support, [i], [j])
    paths = strip_paths(support, pf, [WiredNode(i, False)], [WiredNode(j, False)])
    return [p for p in paths if cut_units(g.without(g.closure(p)), [l], [i, j]) == need]


def ring_ok(g: WiredGraph, ring: Block) -> bool:
    """Removing any one ring path leaves the opposite source's cut unchanged."""
    for path in ring.paths:
        nodes = g.path_nodes(path)
        i, j = nodes[0], nodes[-1]
        l = _third(g.sources, i, j)
        before = cut_units(g, [l], [i, j])
        if cut_units(g.without(g.closure(path)), [l], [i, j]) != before:
            return False
    return True


def find_rings(g: WiredGraph, edge_budget: int | None = None, stats: SolverStats | None = None) -> tuple[list[Block], WiredGraph]:
    _need_three(g)
    s = tuple(sorted(g.sources))
    pairs = [(s[0], s[1]), (s[1], s[2]), (s[0], s[2])]
    rings: list[Block] = []
    while True:
        candidates = []
        for i, j in pairs:
            paths = ring_grade_paths(g, i, j, edge_budget, stats)
            if not paths:
                dbg(f"   no ring-grade {i}->{j} path left")
                return rings, g
            candidates.append([(p, g.closure(p)) for p in paths])
        chosen = None
        for combo in product(*candidates):
            closures = [c for _, c in combo]
            if all(not (a & b) for a, b in combinations(closures, 2)):
                chosen = ring_block(g, (p for p, _ in combo), len(rings))
                if ring_ok(g, chosen):
                    break
                chosen = None
        if chosen is None:
            return rings, g
        dbg(f"   ring {len(rings)}: edges {chosen.edges(g)}")
        rings.append(chosen)
        g = g.without(chosen.arcs)


# ---------------------------------------------------------------------------
# Line-stars (Algorithm 2)
# ---------------------------------------------------------------------------

def _linestar_step(g: WiredGraph, i: int, j: int) -> Block | None:
    l = _third(g.sources, i, j)
    candidates = edge_disjoint_paths(g, i, j)
    if not candidates:
        return None
    base = cut_units(g, [l], [i, j])
    # the candidate whose removal lowers l's cut the least; earliest on ties
    p_ij = min(candidates, key=lambda p: base - cut_units(g.without(g.closure(p)), [l], [i, j]))

    closure = g.closure(p_ij)
    rest = g.without(closure)
    _, family = max_flow_arcs(rest, [i], [l])
    blocked = rest.without(a for a, f in family.items() if f)
    restored = WiredGraph(g.wireless, g.all_arcs, blocked.active | (closure & g.active))
    p_il = edge_disjoint_paths(restored, i, l)
    if not p_il:
        return None
    block = linestar_block(g, p_ij, p_il[0])
    if not block.arcs <= g.active:
        return None
    return block


def find_linestars(g: WiredGraph, h: int, n_rings: int, edge_budget: int | None = None, stats: SolverStats | None = None) -> list[Block]:
    _need_three(g)
    s = tuple(sorted(g.sources))
    target = h - 2 * n_rings
    found: list[Block] = []
    while len(found) < target:
        pairs = [(s[0], s[1]), (s[1], s[2]), (s[0], s[2])]
        # pairs without ring-grade paths go first
        pairs.sort(key=lambda p: bool(ring_grade_paths(g, p[0], p[1], edge_budget, stats)))
        block = None
        for i, j in pairs:
            for a, b in ((i, j), (j, i)):
                block = _linestar_step(g, a, b)
                if block is not None:
                    break
            if block is not None:
                break
        if block is None:
            dbg(f"   line-star search stopped at {len(found)} of {target}")
            break
        block = block.with_id(n_rings + len(found))
        dbg(f"   line-star {block.id}: edges {block.edges(g)}")
        found.append(block)
        g = g.without(block.arcs)
    return found


# ---------------------------------------------------------------------------
# Exhaustive search for small graphs
# ---------------------------------------------------------------------------

def _simple_paths(g: WiredGraph, i: int, j: int) -> list[tuple[int, ...]]:
    mg = nx.MultiDiGraph()
    for a in g.arcs:
        mg.add_edge(a.tail, a.head, key=a.id)
    src, dst = WiredNode(i, False), WiredNode(j, False)
    if src not in mg or dst not in mg:
        return []
    paths = [tuple(k for _, _, k in p) for p in nx.all_simple_edge_paths(mg, src, dst)]
    return sorted(paths, key=lambda p: (len(p), p))


def exhaustive_blocks(g: WiredGraph, h: int) -> tuple[list[Block], list[Block]]:
    """Best (rings, line-stars) by depth-first search over all candidate blocks.

    Maximizes 2|R| + |Q| up to h; only meant for graphs within the ring
    search budget.
    """
    _need_three(g)
    s = tuple(sorted(g.sources))
    paths = {(a, b): _simple_paths(g, a, b) for a, b in permutations(s, 2)}

    ring_cands = []
    for p12, p23, p13 in product(paths[(s[0], s[1])], paths[(s[1], s[2])], paths[(s[0], s[2])]):
        cl = [g.closure(p) for p in (p12, p23, p13)]
        if all(not (x & y) for x, y in combinations(cl, 2)):
            ring_cands.append(ring_block(g, (p12, p23, p13)))

    star_cands: dict[frozenset, Block] = {}
    for i in s:
        j, l = [x for x in s if x != i]
        for a, b in ((j, l), (l, j)):
            for p_ij in paths[(i, a)]:
                for p_il in paths[(i, b)]:
                    try:
                        blk = linestar_block(g, p_ij, p_il)
                    except ArgumentError:
                        continue
                    star_cands.setdefault(blk.arcs, blk)
    stars = sorted(star_cands.values(), key=lambda b: (len(b.arcs), sorted(b.arcs)))

    best: tuple[int, list[Block], list[Block]] = (-1, [], [])

    def pick_stars(residual: WiredGraph, start: int, chosen_r: list[Block], chosen_q: list[Block]):
        nonlocal best
        score = 2 * len(chosen_r) + len(chosen_q)
        if score > best[0]:
            best = (score, list(chosen_r), list(chosen_q))
        if best[0] >= h:
            return
        for k in range(start, len(stars)):
            blk = stars[k]
            if blk.arcs <= residual.active:
                chosen_q.append(blk)
                pick_stars(residual.without(blk.arcs), k + 1, chosen_r, chosen_q)
                chosen_q.pop()
                if best[0] >= h:
                    return

    def pick_rings(residual: WiredGraph, start: int, chosen_r: list[Block]):
        pick_stars(residual, 0, chosen_r, [])
        if best[0] >= h:
            return
        for k in range(start, len(ring_cands)):
            ring = ring_cands[k]
            if ring.arcs <= residual.active and ring_ok(residual, ring):
                chosen_r.append(ring)
                pick_rings(residual.without(ring.arcs), k + 1, chosen_r)
                chosen_r.pop()
                if best[0] >= h:
                    return

    pick_rings(g, 0, [])
    _, rings, stars_chosen = best
    return rings, stars_chosen


# ---------------------------------------------------------------------------
# Exact block packing
# ---------------------------------------------------------------------------

PACKING_ROUNDS = 8


def _peel(g: WiredGraph, arc_ids: Iterable[int], src: int, dst: int) -> tuple[int, ...] | None:
    """Shortest src -> dst path inside the given arcs, lowest arc id per hop."""
    mg = nx.MultiDiGraph()
    for aid in sorted(arc_ids):
        a = g.arc(aid)
        mg.add_edge(a.tail, a.head, key=aid)
    try:
        nodes = nx.shortest_path(mg, WiredNode(src, False), WiredNode(dst, False))
    except (nx.NetworkXNoPath, nx.NodeNotFound):
        return None
    return tuple(min(mg[u][v]) for u, v in zip(nodes, nodes[1:]))


class BlockPacking:
    """0/1 program choosing up to h disjoint blocks with 2|R| + |Q| >= h.

    Slot k is a ring (z_k), a line-star (y_k) or empty. A ring slot routes
    three unit flows s0->s1, s1->s2, s0->s2 that share no wireless edge or
    relay and never pass through the third source; a line-star slot routes
    s0->s1 and s0->s2, which may share arcs and pass through sources.
    Resources (a wireless edge with both its arcs, or a relay's broadcast
    arc) belong to at most one slot, and rings alone never score above h.
    The cost is the number of resources used.
    """

    def __init__(self, g: WiredGraph, h: int):
        _need_three(g)
        self.g = g
        self.h = h
        s = tuple(sorted(g.sources))
        self.commodities = (
            (RING, s[0], s[1]),
            (RING, s[1], s[2]),
            (RING, s[0], s[2]),
            (LINESTAR, s[0], s[1]),
            (LINESTAR, s[0], s[2]),
        )
        self.arcs = g.arcs
        by_key: dict[tuple[str, int], list[int]] = {}
        for j, a in enumerate(self.arcs):
            key = ("edge", a.origin) if a.origin is not None else ("relay", a.tail.node)
            by_key.setdefault(key, []).append(j)
        self.groups = [tuple(v) for _, v in sorted(by_key.items())]

        self.slots = h
        na, nc = len(self.arcs), len(self.commodities)
        self.z0 = self.slots * nc * na
        self.y0 = self.z0 + self.slots
        self.u0 = self.y0 + self.slots
        self.n = self.u0 + self.slots * len(self.groups)

        self._rows: list[int] = []
        self._cols: list[int] = []
        self._vals: list[float] = []
        self._lo: list[float] = []
        self._hi: list[float] = []
        self._build()

    def x(self, k: int, c: int, j: int) -> int:
        return (k * len(self.commodities) + c) * len(self.arcs) + j

    def u(self, k: int, gi: int) -> int:
        return self.u0 + k * len(self.groups) + gi

    def _add(self, terms: Iterable[tuple[int, float]], lo: float, hi: float):
        r = len(self._lo)
        for col, v in terms:
            self._rows.append(r)
            self._cols.append(col)
            self._vals.append(v)
        self._lo.append(lo)
        self._hi.append(hi)

    def _build(self):
        g = self.g
        outgoing: dict[WiredNode, list[int]] = {v: [] for v in g.nodes}
        incoming: dict[WiredNode, list[int]] = {v: [] for v in g.nodes}
        for j, a in enumerate(self.arcs):
            outgoing[a.tail].append(j)
            incoming[a.head].append(j)

        for k in range(self.slots):
            for c, (kind, src, dst) in enumerate(self.commodities):
                supply = (self.z0 if kind == RING else self.y0) + k
                s_node, t_node = WiredNode(src, False), WiredNode(dst, False)
                for v in g.nodes:
                    terms = [(self.x(k, c, j), 1.0) for j in outgoing[v]]
                    terms += [(self.x(k, c, j), -1.0) for j in incoming[v]]
                    sign = 1.0 if v == s_node else -1.0 if v == t_node else 0.0
                    if sign:
                        terms.append((supply, -sign))
                    if terms:
                        self._add(terms, 0, 0)
                self._add([(self.x(k, c, j), 1.0) for j in incoming[s_node]], 0, 0)
                self._add([(self.x(k, c, j), 1.0) for j in outgoing[t_node]], 0, 0)
                if kind == RING:
                    m = WiredNode(_third(g.sources, src, dst), False)
                    self._add([(self.x(k, c, j), 1.0) for j in incoming[m]], 0, 0)

            for gi, members in enumerate(self.groups):
                ring_terms = [(self.x(k, c, j), 1.0) for c in range(3) for j in members]
                self._add(ring_terms + [(self.u(k, gi), -1.0)], -np.inf, 0)
                for c in (3, 4):
                    self._add([(self.x(k, c, j), 1.0) for j in members] + [(self.u(k, gi), -1.0)], -np.inf, 0)

            self._add([(self.z0 + k, 1.0), (self.y0 + k, 1.0)], -np.inf, 1)
            if k + 1 < self.slots:
                self._add(
                    [(self.z0 + k, 2.0), (self.y0 + k, 1.0), (self.z0 + k + 1, -2.0), (self.y0 + k + 1, -1.0)],
                    0,
                    np.inf,
                )

        for gi in range(len(self.groups)):
            self._add([(self.u(k, gi), 1.0) for k in range(self.slots)], -np.inf, 1)
        score = [(self.z0 + k, 2.0) for k in range(self.slots)] + [(self.y0 + k, 1.0) for k in range(self.slots)]
        self._add(score, self.h, np.inf)
        self._add([(self.z0 + k, 2.0) for k in range(self.slots)], -np.inf, self.h)

    def forbid(self, ring: Block):
        """No slot may route exactly these three ring paths again."""
        pos = {a.id: j for j, a in enumerate(self.arcs)}
        used = [(c, pos[aid]) for c, path in enumerate(ring.paths) for aid in path]
        for k in range(self.slots):
            self._add([(self.x(k, c, j), 1.0) for c, j in used], -np.inf, len(used) - 1)

    def forbid_rings(self):
        self._add([(self.z0 + k, 1.0) for k in range(self.slots)], 0, 0)

    def solve(self, node_limit: int) -> tuple[np.ndarray | None, bool]:
        A = sparse.coo_matrix((self._vals, (self._rows, self._cols)), shape=(len(self._lo), self.n)).tocsr()
        cost = np.zeros(self.n)
        cost[self.u0 :] = 1.0
        res = milp(
            cost,
            integrality=np.ones(self.n),
            bounds=Bounds(0, 1),
            constraints=LinearConstraint(A, self._lo, self._hi),
            options={"node_limit": node_limit, "presolve": True},
        )
        if res.x is None:
            return None, res.status == 2
        return np.round(res.x), res.status == 0

    def paths(self, x: np.ndarray, k: int) -> list[tuple[int, ...] | None]:
        out = []
        for c, (_, src, dst) in enumerate(self.commodities):
            support = [a.id for j, a in enumerate(self.arcs) if x[self.x(k, c, j)] > 0.5]
            out.append(_peel(self.g, support, src, dst))
        return out

    def blocks(self, x: np.ndarray) -> tuple[list[Block], list[Block], list[Block]]:
        """(accepted rings, line-stars, rings failing the residual-cut test)."""
        g = self.g
        rings: list[Block] = []
        failing: list[Block] = []
        stars: list[Block] = []
        residual = g
        for k in range(self.slots):
            p = self.paths(x, k)
            if x[self.z0 + k] > 0.5:
                if any(q is None for q in p[:3]):
                    raise DecompositionError(f"packing slot {k} lost a ring path", g.wireless.to_text())
                ring = ring_block(g, p[:3], len(rings))
                if ring_ok(residual, ring):
                    rings.append(ring)
                    residual = residual.without(ring.arcs)
                else:
                    failing.append(ring)
            elif x[self.y0 + k] > 0.5:
                if p[3] is None or p[4] is None:
                    raise DecompositionError(f"packing slot {k} lost a line-star path", g.wireless.to_text())
                stars.append(linestar_block(g, p[3], p[4]))
        return rings, stars, failing


def pack_blocks(g: WiredGraph, h: int, node_limit: int | None = None) -> tuple[list[Block], list[Block], bool]:
    """Rings and line-stars reaching 2|R| + |Q| >= h, found by one integer program.

    Rings that fail the residual-cut test are cut off and the program is
    solved again, up to PACKING_ROUNDS times; rings still failing after that
    are kept as line-stars over two of their paths. When that still falls
    short of h, one more solve runs with rings switched off. The flag is
    False when the node limit stopped any solve early.
    """
    if h <= 0:
        return [], [], True
    limit = PACKING_NODE_LIMIT if node_limit is None else node_limit
    program = BlockPacking(g, h)
    exact = True
    best: tuple[list[Block], list[Block]] = ([], [])

    def score(blocks: tuple[list[Block], list[Block]]) -> int:
        return 2 * len(blocks[0]) + len(blocks[1])

    for round_no in range(PACKING_ROUNDS):
        x, finished = program.solve(limit)
        exact = exact and finished
        if x is None:
            dbg(f"   block packing found no solution (round {round_no})")
            break
        rings, stars, failing = program.blocks(x)
        dbg(f"   block packing round {round_no}: {len(rings)} rings, {len(stars)} line-stars, {len(failing)} rejected")
        if not failing:
            return rings, stars, exact
        kept = (rings, stars + [linestar_block(g, ring.paths[0], ring.paths[2]) for ring in failing])
        if score(kept) > score(best):
            best = kept
        for ring in failing:
            program.forbid(ring)

    if score(best) < h:
        dbg("   block packing without rings")
        program.forbid_rings()
        x, finished = program.solve(limit)
        if x is not None:
            exact = exact and finished
            rings, stars, _ = program.blocks(x)
            if score((rings, stars)) > score(best):
                best = (rings, stars)
    return best[0], best[1], exact


# ---------------------------------------------------------------------------
# Multicast pipeline
# ---------------------------------------------------------------------------

def _renumber(rings: list[Block], stars: list[Block]) -> tuple[tuple[Block, ...], tuple[Block, ...]]:
    rings = tuple(r.with_id(k) for k, r in enumerate(rings))
    stars = tuple(q.with_id(len(rings) + k) for k, q in enumerate(stars))
    return rings, stars


def check_decomposition(d: Decomposition):
    """2|R|+|Q| >= h, the source-degree bound, edge-disjointness and the ring test."""
    g = d.graph
    text = g.wireless.to_text()
    blocks = d.blocks
    for a, b in combinations(blocks, 2):
        if a.arcs & b.arcs:
            raise DecompositionError(f"blocks {a.id} and {b.id} share arcs {sorted(a.arcs & b.arcs)}", text)
    if 2 * len(d.rings) + len(d.linestars) < d.h:
        raise DecompositionError(
            f"2|R|+|Q| = {2 * len(d.rings) + len(d.linestars)} is below h = {d.h}", text
        )
    min_degree = min(g.wireless.degree(s) for s in g.sources)
    if len(d.rings) + len(d.linestars) > min_degree:
        raise DecompositionError(f"|R|+|Q| exceeds the smallest source degree {min_degree}", text)
    residual = g
    for ring in d.rings:
        if not ring_ok(residual, ring):
            raise DecompositionError(f"ring {ring.id} fails the residual-cut test", text)
        residual = residual.without(ring.arcs)


def decompose_multicast(g: WiredGraph, edge_budget: int | None = None, search_budget: int | None = None) -> Decomposition:
    _need_three(g)
    search_budget = RING_SEARCH_BUDGET if search_budget is None else search_budget
    stats = SolverStats()
    h = compute_metrics(g).h

    rings, residual = find_rings(g, edge_budget, stats)
    stars = find_linestars(residual, h, len(rings), edge_budget, stats)

    if 2 * len(rings) + len(stars) < h and rings:
        dbg("   retrying without rings")
        alt = find_linestars(g, h, 0, edge_budget, stats)
        if len(alt) > 2 * len(rings) + len(stars):
            rings, stars = [], alt

    if 2 * len(rings) + len(stars) < h:
        if len(g.arcs) > search_budget:
            dbg("   greedy search fell short; packing blocks with the integer program")
            rings, stars, packed_exact = pack_blocks(g, h)
            stats.exact = stats.exact and packed_exact
        else:
            dbg("   greedy search fell short; running exhaustive block search")
            rings, stars = exhaustive_blocks(g, h)

    stars = stars[: max(0, h - 2 * len(rings))]
    rings_t, stars_t = _renumber(rings, stars)
    d = Decomposition(graph=g, rings=rings_t, linestars=stars_t, h=h, exact=stats.exact)
    check_decomposition(d)
    return d


def multicast_rate(d: Decomposition) -> Fraction:
    """|R|*C + |Q|*C/2 in bits per slot per source."""
    C = d.graph.capacity
    rate = Fraction(len(d.rings) * C) + Fraction(len(d.linestars) * C, 2)
    bound = Fraction(d.h * C, 2)
    if rate < bound:
        raise DecompositionError(f"multicast rate {rate} is below hC/2 = {bound}", d.graph.wireless.to_text())
    if rate > bound:
        raise DecompositionError(f"multicast rate {rate} exceeds the capacity hC/2 = {bound}", d.graph.wireless.to_text())
    return rate


# ---------------------------------------------------------------------------
# Multiple unicast
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UnicastPlan:
    anchor: tuple[int, int]
    hub: int
    families: dict[tuple[int, int], tuple[tuple[int, ...], ...]]
    capacity: int
    graph: WiredGraph = field(compare=False, repr=False)
    exact: bool = True

    def rate(self, i: int, j: int) -> int:
        """R_{i<->j} in bits per slot."""
        key = (min(i, j), max(i, j))
        return len(self.families.get(key, ())) * self.capacity

    def corner(self) -> tuple[int, int, int]:
        """(R_12, R_13, R_23) over the sorted sources."""
        a, b, c = sorted(self.graph.sources)
        return self.rate(a, b), self.rate(a, c), self.rate(b, c)

    def blocks(self, start_id: int = 0) -> list[Block]:
        out = []
        for key in sorted(self.families):
            for path in self.families[key]:
                out.append(line_block(self.graph, path, start_id + len(out)))
        return out


def unicast_problem(g: WiredGraph, hub: int, partner: int, to_partner: int, to_other: int) -> BinaryFlowProblem:
    """Minimum flow out of the hub meeting both demands.

    The partner absorbs everything it receives; the third source consumes
    `to_other` units and may pass the rest through.
    """
    l = _third(g.sources, hub, partner)
    cons = [
        fix("out", hub, to_partner + to_other),
        fix("in", hub, 0),
        fix("in", partner, to_partner),
        fix("out", partner, 0),
        FlowConstraint(f"I[{l}]-O[{l}]={to_other}", ((1, "in", l), (-1, "out", l)), to_other),
    ]
    return BinaryFlowProblem(graph=g, constraints=cons, sense="min", flow_weight=1.0)


def hub_paths(g: WiredGraph, flow: dict[int, int], hub: int, sinks: dict[int, int]) -> list[tuple[int, ...]]:
    """Split a unit flow out of the hub into simple paths.

    Source s terminates `sinks[s]` of them; paths may run through a sink
    on their way to another one. Leftover circulation is ignored.
    """
    mg = nx.MultiDiGraph()
    for aid in sorted(flow):
        if flow[aid] > 0:
            a = g.arc(aid)
            mg.add_edge(a.tail, a.head, key=aid)
    for s, count in sinks.items():
        for k in range(count):
            mg.add_edge(WiredNode(s, False), SUPER_SINK, key=-1 - k)

    start = WiredNode(hub, False)
    paths = []
    while start in mg and SUPER_SINK in mg and nx.has_path(mg, start, SUPER_SINK):
        nodes = nx.shortest_path(mg, start, SUPER_SINK)
        path = []
        for u, v in zip(nodes, nodes[1:]):
            key = min(mg[u][v])
            mg.remove_edge(u, v, key=key)
            if v != SUPER_SINK:
                path.append(key)
        paths.append(tuple(path))
    return paths


def unicast_corner(g: WiredGraph, anchor: tuple[int, int], edge_budget: int | None = None) -> UnicastPlan:
    """Corner point with the anchor pair at its min-cut.

    The hub is the anchor endpoint with the larger single-source cut; it
    also talks to the third source at [C_{hub;others} - C_{anchor}]+.
    """
    _need_three(g)
    i, j = anchor
    if i == j or i not in g.sources or j not in g.sources:
        raise ArgumentError(f"anchor {anchor} must be two distinct sources")
    l = _third(g.sources, i, j)
    pair = cut_units(g, [i], [j])
    cut_i = cut_units(g, [i], [j, l])
    cut_j = cut_units(g, [j], [i, l])
    hub, partner, hub_cut = (i, j, cut_i) if cut_i >= cut_j else (j, i, cut_j)
    if pair != min(cut_i, cut_j):
        raise ArgumentError(
            f"cut identity fails for anchor {anchor}: C_{{{i};{j}}}={pair}, min cut to the rest {min(cut_i, cut_j)}"
        )
    extra = max(0, hub_cut - pair)

    sol = solve_binary_flow(unicast_problem(g, hub, partner, pair, extra), edge_budget)
    flow = remove_cyclic_flow(g, sol.flow)
    paths = hub_paths(g, flow, hub, {partner: pair, l: extra})

    to_partner = tuple(p for p in paths if g.path_nodes(p)[-1] == partner)
    to_other = tuple(p for p in paths if g.path_nodes(p)[-1] == l)
    text = g.wireless.to_text()
    if len(to_partner) != pair or len(to_other) != extra:
        raise DecompositionError(
            f"unicast families {len(to_partner)}+{len(to_other)} do not match the corner {pair}+{extra}", text
        )
    for a, b in combinations(to_partner + to_other, 2):
        if g.closure(a) & g.closure(b):
            raise DecompositionError("unicast paths are not edge-disjoint", text)

    families = {(min(hub, partner), max(hub, partner)): to_partner}
    if to_other:
        families[(min(hub, l), max(hub, l))] = to_other
    return UnicastPlan(anchor=(i, j), hub=hub, families=families, capacity=g.capacity, exact=sol.exact, graph=g)


def unicast_bound_ok(g: WiredGraph, rates: dict[tuple[int, int], int]) -> bool:
    """R_{i<->j} + R_{i<->l} <= C_{i;j,l} for every source i (rates in bits)."""
    s = tuple(sorted(g.sources))
    for i in s:
        j, l = [x for x in s if x != i]
        total = rates.get((min(i, j), max(i, j)), 0) + rates.get((min(i, l), max(i, l)), 0)
        if total > cut_units(g, [i], [j, l]) * g.capacity:
            return False
    return True


# ---------------------------------------------------------------------------
# Combined multicast + unicast corners
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Corner:
    multicast: Fraction
    unicast: dict[tuple[int, int], int]
    decomposition: Decomposition | None = None
    plan: UnicastPlan | None = None

    def as_tuple(self) -> tuple[Fraction, ...]:
        keys = sorted(self.unicast)
        return (self.multicast, *(Fraction(self.unicast[k]) for k in keys))


def _combined_ok(g: WiredGraph, R: Fraction, rates: dict[tuple[int, int], int]) -> bool:
    s = tuple(sorted(g.sources))
    for i in s:
        j, l = [x for x in s if x != i]
        total = 2 * R + rates.get((min(i, j), max(i, j)), 0) + rates.get((min(i, l), max(i, l)), 0)
        if total > cut_units(g, [i], [j, l]) * g.capacity:
            return False
    return True


def combined_corners(g: WiredGraph, edge_budget: int | None = None) -> list[Corner]:
    """Pure-unicast corners (one per anchor pair) and the multicast-max corner."""
    _need_three(g)
    s = tuple(sorted(g.sources))
    pairs = [(s[0], s[1]), (s[0], s[2]), (s[1], s[2])]
    corners: list[Corner] = []
    for anchor in pairs:
        plan = unicast_corner(g, anchor, edge_budget)
        rates = {p: plan.rate(*p) for p in pairs}
        corners.append(Corner(Fraction(0), rates, plan=plan))

    d = decompose_multicast(g, edge_budget)
    R = multicast_rate(d)
    residual = g.restricted_to(d.leftover)
    best_pair, best_cut = pairs[0], -1
    for p in pairs:
        value = cut_units(residual, [p[0]], [p[1]])
        if value > best_cut:
            best_pair, best_cut = p, value
    lines = []
    if best_cut > 0:
        next_id = len(d.rings) + len(d.linestars)
        for path in edge_disjoint_paths(residual, best_pair[0], best_pair[1]):
            lines.append(line_block(g, path, next_id + len(lines)))
    rates = {p: 0 for p in pairs}
    rates[best_pair] = len(lines) * g.capacity
    combined = Decomposition(graph=g, rings=d.rings, linestars=d.linestars, lines=tuple(lines), h=d.h, exact=d.exact)
    if not _combined_ok(g, R, rates):
        raise DecompositionError("combined corner breaks the per-source cut bound", g.wireless.to_text())
    corners.append(Corner(R, rates, decomposition=combined))
    return corners


def time_share(corners: list[Corner], weights: Iterable[Fraction | int | float]) -> tuple[Fraction, ...]:
    """Rate tuple (R, R_12, R_13, R_23) of a convex combination of corners."""
    ws = [Fraction(w).limit_denominator() if isinstance(w, float) else Fraction(w) for w in weights]
    if len(ws) != len(corners):
        raise ArgumentError(f"{len(ws)} weights for {len(corners)} corners")
    if any(w < 0 for w in ws) or sum(ws) != 1:
        raise ArgumentError("time-sharing weights must be nonnegative and sum to 1")
    acc = [Fraction(0)] * len(corners[0].as_tuple())
    for w, c in zip(ws, corners):
        acc = [a + w * x for a, x in zip(acc, c.as_tuple())]
    return tuple(acc)


# ---------------------------------------------------------------------------
# Dump format
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DumpRecord:
    id: int
    kind: str
    edges: tuple[int, ...]


def dump_blocks(g: WiredGraph, blocks: Iterable[Block], header: str = "") -> str:
    lines = [f"# {header}"] if header else []
    for b in blocks:
        lines.append(f"block {b.id} type {b.kind} edges {','.join(map(str, b.edges(g)))}")
    return "\n".join(lines) + "\n"


def dump_decomposition(d: Decomposition) -> str:
    head = (
        f"decomposition h={d.h} rings={len(d.rings)} linestars={len(d.linestars)} "
        f"rate={multicast_rate(d)} capacity={d.graph.capacity} {'exact' if d.exact else 'heuristic'}"
    )
    return dump_blocks(d.graph, d.blocks, head)


def parse_dump(text: str) -> list[DumpRecord]:
    out = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 6 or parts[0] != "block" or parts[2] != "type" or parts[4] != "edges":
            raise ParseError("expected 'block <id> type <kind> edges e1,e2,...'", line_no)
        if parts[3] not in (RING, LINESTAR, LINE):
            raise ParseError(f"unknown block type {parts[3]!r}", line_no)
        try:
            edges = tuple(int(e) for e in parts[5].split(","))
            out.append(DumpRecord(int(parts[1]), parts[3], edges))
        except ValueError:
            raise ParseError(f"malformed number in {line!r}", line_no)
    return out
