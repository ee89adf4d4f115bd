# src/simulator.py
# --------------------------------------------
# Slot-based discrete-event simulation of coding blocks over links with
# bounded random delays. simpy drives the clock; every transmission to a
# neighbor is a timeout of 1..D slots whose callback drops the packet into
# the neighbor's inbox. Arrivals at slot t are handled before anything is
# encoded at slot t.
#
# Each block tree runs as a "lane". The three lines of a ring share their
# block id and therefore the same message streams.

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np
import simpy

from src.codec import (
    LINE_KIND,
    LINESTAR_KIND,
    STAR_KIND,
    AsyncNode,
    CodingTree,
    MessageStore,
    SyncNode,
    TreeCode,
    line_decode,
    line_encode_async,
    star_decode,
    star_encode_async,
)
from src.config import dbg
from src.decompose import Decomposition, UnicastPlan
from src.errors import ArgumentError, ProtocolViolation
from src.finite_field import CoeffTriplets, choose_triplets, field_for
from src.graph_core import WiredNode, WirelessGraph
from src.headers import LINE, STAR, header_hex, packet_from_bytes, packet_to_bytes

SYNC = "sync"
ASYNC = "async"
MULTICAST = "multicast"
UNICAST = "unicast"
COMBINED = "combined"

GENERATOR_NAME = "numpy.random.PCG64"


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DelayModel:
    """Per-transmission delays in 1..bound.

    `adversarial` replays `delays` in draw order and then uses `fill`.
    With `fifo` a link never delivers out of order.
    """

    bound: int = 1
    distribution: str = "fixed"
    fifo: bool = False
    delays: tuple[int, ...] = ()
    fill: int = 1
    seed: int | None = None

    def __post_init__(self):
        if self.bound < 1:
            raise ArgumentError(f"delay bound must be >= 1, got {self.bound}")
        if self.distribution not in ("uniform", "fixed", "adversarial"):
            raise ArgumentError(f"unknown delay distribution {self.distribution!r}")
        for d in (*self.delays, self.fill):
            if not 1 <= d <= self.bound:
                raise ArgumentError(f"delay {d} outside 1..{self.bound}")

    @property
    def synchronous(self) -> bool:
        if self.distribution == "fixed":
            return True
        if self.distribution == "adversarial":
            return all(d == 1 for d in (*self.delays, self.fill))
        return self.bound == 1


class DelaySampler:
    def __init__(self, model: DelayModel, rng: np.random.Generator):
        self.model = model
        self.rng = rng
        self._replay = list(model.delays)
        self._last_arrival: dict[tuple, int] = {}

    def draw(self, link: tuple, slot: int) -> int:
        m = self.model
        if m.distribution == "fixed":
            d = 1
        elif m.distribution == "uniform":
            d = int(self.rng.integers(1, m.bound + 1))
        else:
            d = self._replay.pop(0) if self._replay else m.fill
        arrival = slot + d
        if m.fifo:
            arrival = max(arrival, self._last_arrival.get(link, 0))
            self._last_arrival[link] = arrival
        return arrival - slot


@dataclass(frozen=True)
class SimBlock:
    block_id: int
    tree: CodingTree
    session: str = MULTICAST


@dataclass(frozen=True)
class SimConfig:
    blocks: tuple[SimBlock, ...]
    mode: str = SYNC
    horizon: int = 40
    delay: DelayModel = field(default_factory=DelayModel)
    field_bits: int = 8
    seed: int = 0
    session: str = MULTICAST
    header_blocks: int = 1
    retention: bool = False
    graph: WirelessGraph | None = None
    line_coeffs: tuple[int, int] = (1, 1)
    triplets: CoeffTriplets | None = None

    def __post_init__(self):
        if self.mode not in (SYNC, ASYNC):
            raise ArgumentError(f"mode must be 'sync' or 'async', got {self.mode!r}")
        if self.session not in (MULTICAST, UNICAST, COMBINED):
            raise ArgumentError(f"unknown session type {self.session!r}")
        if self.mode == SYNC and not self.delay.synchronous:
            raise ArgumentError("synchronized mode needs every delay equal to 1")
        if not self.blocks:
            raise ArgumentError("nothing to simulate: no blocks")
        if self.horizon <= self.drain:
            raise ArgumentError(f"horizon {self.horizon} leaves no slot to generate in (drain {self.drain})")
        if self.field_bits < 1:
            raise ArgumentError(f"field size must be >= 1 bit, got {self.field_bits}")
        if self.triplets is None and any(b.tree.star_type for b in self.blocks):
            choose_triplets(self.field_bits)

    @property
    def D(self) -> int:
        return self.delay.bound

    @property
    def period(self) -> int:
        return max(b.tree.period for b in self.blocks)

    @property
    def drain(self) -> int:
        return max(b.tree.L * self.D + b.tree.c for b in self.blocks)

    @property
    def generation_horizon(self) -> int:
        """Sources generate on slots < T - (LD + c), rounded down to whole periods."""
        t_gen = self.horizon - self.drain
        return t_gen - t_gen % self.period


# ---------------------------------------------------------------------------
# Topology shorthands
# ---------------------------------------------------------------------------

def line_graph(M: int, capacity: int = 1) -> WirelessGraph:
    if M < 2:
        raise ArgumentError(f"a line needs at least 2 nodes, got {M}")
    return WirelessGraph.build(M, [(k, k + 1) for k in range(1, M)], (1, M), capacity)


def star_graph(capacity: int = 1) -> WirelessGraph:
    return WirelessGraph.build(4, [(1, 4), (2, 4), (3, 4)], (1, 2, 3), capacity)


def linestar_graph(arms: tuple[int, int, int] = (2, 1, 1), capacity: int = 1) -> WirelessGraph:
    """Sources 1, 2, 3 at the given hop counts from center 4; extra relays from 5 on."""
    edges = []
    next_id = 5
    for src, hops in zip((1, 2, 3), arms):
        if hops < 1:
            raise ArgumentError(f"arm length must be >= 1, got {hops}")
        prev = src
        for _ in range(hops - 1):
            edges.append((prev, next_id))
            prev = next_id
            next_id += 1
        edges.append((prev, 4))
    return WirelessGraph.build(next_id - 1, edges, (1, 2, 3), capacity)


def tree_of(graph: WirelessGraph, kind: str) -> CodingTree:
    """The whole graph as one coding tree."""
    links = tuple((u, v, eid) for eid, (u, v) in enumerate(graph.edges))
    return CodingTree(kind, tuple(sorted(graph.sources)), links)


def topology_config(graph: WirelessGraph, kind: str, **kwargs) -> SimConfig:
    return SimConfig(blocks=(SimBlock(0, tree_of(graph, kind)),), graph=graph, **kwargs)


def line_config(M: int, **kwargs) -> SimConfig:
    return topology_config(line_graph(M), LINE_KIND, **kwargs)


def star_config(**kwargs) -> SimConfig:
    return topology_config(star_graph(), STAR_KIND, **kwargs)


def linestar_config(arms: tuple[int, int, int] = (2, 1, 1), **kwargs) -> SimConfig:
    return topology_config(linestar_graph(arms), LINESTAR_KIND, **kwargs)


def decomposition_blocks(d: Decomposition) -> tuple[SimBlock, ...]:
    out = []
    for b in d.rings + d.linestars:
        out += [SimBlock(b.id, t, MULTICAST) for t in b.trees]
    for b in d.lines:
        out += [SimBlock(b.id, t, UNICAST) for t in b.trees]
    return tuple(out)


def decomposition_config(d: Decomposition, **kwargs) -> SimConfig:
    session = COMBINED if d.lines else MULTICAST
    kwargs.setdefault("session", session)
    return SimConfig(
        blocks=decomposition_blocks(d),
        graph=d.graph.wireless,
        header_blocks=max(d.header_blocks, len(d.blocks)),
        **kwargs,
    )


def unicast_config(plan: UnicastPlan, **kwargs) -> SimConfig:
    blocks = tuple(SimBlock(b.id, b.trees[0], UNICAST) for b in plan.blocks())
    kwargs.setdefault("session", UNICAST)
    return SimConfig(blocks=blocks, graph=plan.graph.wireless, header_blocks=max(len(blocks), 1), **kwargs)


# ---------------------------------------------------------------------------
# Trace
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceEvent:
    id: int
    slot: int
    node: int
    edge: str
    kind: str
    header: str
    payload: str

    def line(self) -> str:
        return f"{self.slot},{self.node},{self.edge},{self.kind},{self.header},{self.payload}"


@dataclass(frozen=True)
class LaneInfo:
    index: int
    block_id: int
    kind: str
    origins: tuple[int, ...]
    L: int
    c: int
    period: int
    n_gen: int
    session: str


@dataclass
class SimTrace:
    meta: dict
    lanes: list[LaneInfo] = field(default_factory=list)
    events: list[TraceEvent] = field(default_factory=list)
    relay_per_slot: Counter = field(default_factory=Counter)
    source_per_slot: Counter = field(default_factory=Counter)
    generated: dict[tuple[int, int, int], int] = field(default_factory=dict)
    decodes: dict[tuple[int, int, int, int], tuple[int, int]] = field(default_factory=dict)
    watermarks: list[tuple[int, int, int, int, int]] = field(default_factory=list)
    max_delay: dict[tuple[int, int], int] = field(default_factory=dict)

    @property
    def D(self) -> int:
        return self.meta["D"]

    @property
    def horizon(self) -> int:
        return self.meta["T"]

    @property
    def relay_tx(self) -> int:
        return sum(self.relay_per_slot.values())

    @property
    def src_tx(self) -> int:
        return sum(self.source_per_slot.values())

    @property
    def delivered(self) -> int:
        return sum(
            1
            for (lane, node, origin, _seq) in self.decodes
            if node != origin and node in self.lanes[lane].origins
        )

    def add(self, slot: int, node: int, edge: str, kind: str, header: str = "-", payload: str = "-") -> int:
        ev = TraceEvent(len(self.events), slot, node, edge, kind, header or "-", payload)
        self.events.append(ev)
        return ev.id

    def demands(self) -> list[tuple[int, int, int]]:
        """(lane, origin, destination) for every stream a lane must deliver."""
        return [(ln.index, o, d) for ln in self.lanes for o in ln.origins for d in ln.origins if o != d]

    def rate(self, origin: int, dest: int) -> Fraction:
        """Delivered bits per slot from origin to dest, summed over lanes."""
        C = self.meta["field_bits"]
        total = Fraction(0)
        for ln in self.lanes:
            if origin not in ln.origins or dest not in ln.origins or origin == dest:
                continue
            got = sum(1 for s in range(ln.n_gen) if (ln.index, dest, origin, s) in self.decodes)
            if ln.n_gen:
                total += Fraction(got, ln.n_gen) * Fraction(C, ln.period)
        return total

    def min_rate(self) -> Fraction:
        pairs = {(o, d) for _, o, d in self.demands()}
        return min((self.rate(o, d) for o, d in pairs), default=Fraction(0))

    def summary_line(self) -> str:
        worst = max(self.max_delay.values(), default=0)
        return f"summary: relay_tx={self.relay_tx}, src_tx={self.src_tx}, max_delay={worst}, rate={self.min_rate()}"

    def to_text(self) -> str:
        head = "# " + " ".join(f"{k}={v}" for k, v in self.meta.items())
        lines = [head, "slot,node,edge,event,header-hex,payload-hex"]
        lines += [ev.line() for ev in self.events]
        lines.append(self.summary_line())
        return "\n".join(lines) + "\n"

    def counters_csv(self) -> str:
        rows = ["counter,value"]
        rows += [
            f"relay_tx,{self.relay_tx}",
            f"src_tx,{self.src_tx}",
            f"delivered,{self.delivered}",
            f"max_delay,{max(self.max_delay.values(), default=0)}",
            f"rate,{self.min_rate()}",
        ]
        for (o, d), v in sorted(self.max_delay.items()):
            rows.append(f"max_delay_{o}_{d},{v}")
        return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# Routing agent
# ---------------------------------------------------------------------------

class RoutingNode:
    """Store-and-forward: every new message is rebroadcast once by every non-leaf."""

    def __init__(self, tree: CodingTree, node: int):
        self.tree = tree
        self.node = node
        self.seen: set[tuple[int, int]] = set()
        self.queue: list[tuple[int, int, int]] = []

    def receive(self, origin: int, seq: int, payload: int) -> bool:
        if (origin, seq) in self.seen or origin == self.node:
            return False
        self.seen.add((origin, seq))
        if not self.tree.is_leaf(self.node):
            self.queue.append((origin, seq, payload))
        return True


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------

def _at_event(exc: ProtocolViolation, event_id: int) -> ProtocolViolation:
    if exc.event_id is not None:
        return exc
    return ProtocolViolation(exc.args[0], event_id)


@dataclass
class _Lane:
    info: LaneInfo
    tree: CodingTree
    code: TreeCode
    agents: dict
    inbox: dict[int, list] = field(default_factory=dict)


class Simulation:
    def __init__(self, cfg: SimConfig, routing: bool = False):
        self.cfg = cfg
        self.routing = routing
        self.gf = field_for(cfg.field_bits)
        payload_seed, delay_seed = np.random.SeedSequence(cfg.seed).spawn(2)
        self.payload_rng = np.random.default_rng(payload_seed)
        delay_rng = np.random.default_rng(delay_seed if cfg.delay.seed is None else cfg.delay.seed)
        self.delays = DelaySampler(cfg.delay, delay_rng)
        self.env = simpy.Environment()
        self._payloads: dict[tuple[int, int, int], int] = {}
        self.trace = SimTrace(
            meta={
                "mode": "routing" if routing else cfg.mode,
                "session": cfg.session,
                "T": cfg.horizon,
                "T_gen": cfg.generation_horizon,
                "D": cfg.D,
                "delay": cfg.delay.distribution,
                "fifo": int(cfg.delay.fifo),
                "field_bits": cfg.field_bits,
                "poly": self.gf.poly_str.replace(" ", ""),
                "seed": cfg.seed,
                "generator": GENERATOR_NAME,
            }
        )
        self.lanes = [self._lane(k, b) for k, b in enumerate(cfg.blocks)]

    # -- setup -------------------------------------------------------------

    def _lane(self, index: int, block: SimBlock) -> _Lane:
        cfg = self.cfg
        tree = block.tree
        code = TreeCode(tree, self.gf, cfg.triplets, cfg.line_coeffs)
        t_gen = cfg.generation_horizon
        n_gen = -(-t_gen // tree.period)
        info = LaneInfo(index, block.block_id, tree.kind, tree.origins, tree.L, tree.c, tree.period, n_gen, block.session)
        self.trace.lanes.append(info)
        retention = None
        if cfg.retention:
            retention = ((tree.L + 2) * cfg.D) // tree.period + 1

        agents = {}
        for n in tree.nodes:
            if self.routing:
                agents[n] = RoutingNode(tree, n)
                continue
            horizon = {o: n_gen for o in tree.origins}
            if cfg.mode == SYNC:
                store = MessageStore(tree.origins, horizon, retention) if tree.is_origin(n) else None
                agents[n] = SyncNode(code, n, store)
            else:
                store = MessageStore(tree.origins, horizon, retention)
                agents[n] = AsyncNode(code, n, store, cfg.D, block.block_id)
        return _Lane(info, tree, code, agents)

    def payload(self, block_id: int, origin: int, seq: int) -> int:
        key = (block_id, origin, seq)
        if key not in self._payloads:
            self._payloads[key] = self.gf.random_symbols(self.payload_rng, 1)[0]
        return self._payloads[key]

    def _is_source(self, n: int, lane: _Lane) -> bool:
        if self.cfg.graph is not None:
            return self.cfg.graph.is_source(n)
        return lane.tree.is_origin(n)

    def _hex(self, x: int) -> str:
        return format(x, f"0{(self.cfg.field_bits + 3) // 4}x")

    # -- per slot ----------------------------------------------------------

    def _clock(self):
        for t in range(self.cfg.horizon):
            for lane in self.lanes:
                self._slot(lane, t)
            yield self.env.timeout(1)

    def _slot(self, lane: _Lane, t: int):
        tree = lane.tree
        for n in tree.nodes:
            agent = lane.agents[n]
            inputs = {}
            for dlv in lane.inbox.pop(n, []):
                self._receive(lane, n, agent, dlv, t, inputs)

            if tree.is_origin(n) and t % tree.period == 0:
                seq = t // tree.period
                if seq < lane.info.n_gen:
                    self._generate(lane, n, agent, seq, t)

            if self.routing:
                self._route(lane, n, agent, t)
            elif self.cfg.mode == SYNC:
                x = agent.encode(t, inputs)
                self._broadcast(lane, n, t, x, "-", x)
            else:
                agent.advance()
                for phase in agent.phases(t):
                    pkt = line_encode_async(agent) if not tree.star_type else star_encode_async(agent, phase)
                    head = header_hex(pkt.header, pkt.block_id, self.cfg.D, self.cfg.header_blocks)
                    wire = packet_to_bytes(pkt, self.cfg.D, self.cfg.header_blocks, self.cfg.field_bits)
                    self._broadcast(lane, n, t, wire, head, pkt.payload)

    def _generate(self, lane: _Lane, n: int, agent, seq: int, t: int):
        value = self.payload(lane.info.block_id, n, seq)
        self.trace.generated[(lane.info.index, n, seq)] = t
        if self.routing:
            agent.queue.append((n, seq, value))
        else:
            agent.store.put(n, seq, value)

    def _route(self, lane: _Lane, n: int, agent: RoutingNode, t: int):
        queue, agent.queue = agent.queue, []
        for origin, seq, value in queue:
            self._broadcast(lane, n, t, (origin, seq, value), f"{origin}:{seq}", value)

    def _broadcast(self, lane: _Lane, n: int, t: int, item, head: str, payload: int):
        tree = lane.tree
        role = "source" if tree.is_origin(n) else "relay"
        counter = self.trace.source_per_slot if role == "source" else self.trace.relay_per_slot
        counter[t] += 1
        send_id = self.trace.add(t, n, f"b{lane.info.block_id}", "send", head, self._hex(payload))
        for m in tree.neighbors(n):
            d = self.delays.draw((lane.info.index, n, m), t)
            if not 1 <= d <= self.cfg.D:
                raise ProtocolViolation(f"delay {d} outside 1..{self.cfg.D}", send_id)
            ev = self.env.timeout(d, value=(m, n, t, item, send_id))
            ev.callbacks.append(lambda e, lane=lane: self._arrive(lane, e))

    def _arrive(self, lane: _Lane, ev):
        m = ev.value[0]
        lane.inbox.setdefault(m, []).append(ev.value)

    def _receive(self, lane: _Lane, n: int, agent, dlv, t: int, inputs: dict):
        _, sender, sent, item, send_id = dlv
        tree = lane.tree
        edge = f"{WiredNode(sender, not self._is_source(sender, lane)).label}-{n}"
        if not 1 <= t - sent <= self.cfg.D:
            raise ProtocolViolation(f"packet from slot {sent} arrived at {t}", send_id)

        if self.routing:
            origin, seq, value = item
            ev_id = self.trace.add(t, n, edge, "recv", f"{origin}:{seq}", self._hex(value))
            if agent.receive(origin, seq, value):
                self._decoded(lane, n, origin, seq, value, t, ev_id)
            return

        if self.cfg.mode == SYNC:
            ev_id = self.trace.add(t, n, edge, "recv", "-", self._hex(item))
            inputs[sender] = item
            try:
                messages = agent.receive(sender, t, item, ev_id)
            except ProtocolViolation as exc:
                raise _at_event(exc, ev_id) from exc
        else:
            kind = STAR if tree.star_type else LINE
            pkt = packet_from_bytes(item, kind, self.cfg.D, self.cfg.header_blocks, self.cfg.field_bits)
            if pkt.block_id != lane.info.block_id:
                raise ProtocolViolation(f"packet of block {pkt.block_id} on block {lane.info.block_id}")
            head = header_hex(pkt.header, pkt.block_id, self.cfg.D, self.cfg.header_blocks)
            ev_id = self.trace.add(t, n, edge, "recv", head, self._hex(pkt.payload))
            try:
                if tree.star_type:
                    messages = star_decode(agent, sender, [pkt], ev_id)
                else:
                    messages = line_decode(agent, sender, pkt, ev_id)
            except ProtocolViolation as exc:
                raise _at_event(exc, ev_id) from exc

        for msg in messages:
            self._decoded(lane, n, msg.origin, msg.timestamp // tree.period, msg.payload, t, ev_id)

    def _decoded(self, lane: _Lane, n: int, origin: int, seq: int, value: int, t: int, ev_id: int):
        info = lane.info
        if value != self.payload(info.block_id, origin, seq):
            raise ProtocolViolation(f"node {n} decoded a wrong payload for W{origin}[{seq}]", ev_id)
        stamp = seq * info.period
        dec_id = self.trace.add(t, n, f"W{origin}@{stamp}", "decode", "-", self._hex(value))
        self.trace.decodes[(info.index, n, origin, seq)] = (t, dec_id)
        if n in info.origins:
            key = (origin, n)
            self.trace.max_delay[key] = max(self.trace.max_delay.get(key, 0), t - stamp)
        store = getattr(lane.agents[n], "store", None)
        if store is not None:
            self.trace.watermarks.append((t, info.index, n, origin, store.watermark(origin)))
        dbg(f"   slot {t}: node {n} decoded W{origin}@{stamp}")

    def run(self) -> SimTrace:
        self.env.process(self._clock())
        self.env.run(until=self.cfg.horizon)
        return self.trace


def run(cfg: SimConfig) -> SimTrace:
    return Simulation(cfg).run()


def run_routing_baseline(cfg: SimConfig) -> SimTrace:
    """Store-and-forward over the same trees, no coding."""
    return Simulation(cfg, routing=True).run()


# ---------------------------------------------------------------------------
# Checks and counters
# ---------------------------------------------------------------------------

@dataclass
class RtReport:
    passed: bool
    slack: dict[tuple[int, int, int], int]
    failures: list[tuple[int | None, str]]


def verify_rt(trace: SimTrace, L: int | None = None, D: int | None = None, c: int | None = None) -> RtReport:
    """Every generated message reaches every demanded destination by slot LD + t + c.

    L and c default to each lane's own values; slack is the worst margin
    per (lane, origin, destination).
    """
    D = trace.D if D is None else D
    slack: dict[tuple[int, int, int], int] = {}
    failures: list[tuple[int | None, str]] = []
    for lane, origin, dest in trace.demands():
        info = trace.lanes[lane]
        bound_l = info.L if L is None else L
        bound_c = info.c if c is None else c
        worst = None
        for seq in range(info.n_gen):
            stamp = trace.generated.get((lane, origin, seq))
            if stamp is None:
                failures.append((None, f"W{origin}[{seq}] was never generated on lane {lane}"))
                continue
            got = trace.decodes.get((lane, dest, origin, seq))
            if got is None:
                failures.append((None, f"node {dest} never decoded W{origin}@{stamp} on lane {lane}"))
                continue
            slot, ev_id = got
            margin = bound_l * D + stamp + bound_c - slot
            if margin < 0:
                failures.append((ev_id, f"node {dest} decoded W{origin}@{stamp} at slot {slot}, bound {slot + margin}"))
            worst = margin if worst is None else min(worst, margin)
        if worst is not None:
            slack[(lane, origin, dest)] = worst
    return RtReport(passed=not failures, slack=slack, failures=failures)


@dataclass(frozen=True)
class TransmissionCount:
    total: int
    window: int
    generations: int
    per_generation: Fraction


def steady_window(trace: SimTrace) -> tuple[int, int]:
    """Slots [w0, w1) after warm-up and before the drain, whole periods long."""
    period = max((ln.period for ln in trace.lanes), default=1)
    warm = max((ln.L * trace.D + ln.c for ln in trace.lanes), default=0)
    w0 = -(-warm // period) * period
    t_gen = trace.meta["T_gen"]
    w1 = w0 + ((t_gen - w0) // period) * period
    if w1 <= w0:
        raise ArgumentError(f"horizon {trace.horizon} is too short for a steady window")
    return w0, w1


def count_transmissions(trace: SimTrace, role: str = "relay") -> TransmissionCount:
    if role not in ("relay", "source"):
        raise ArgumentError(f"role must be 'relay' or 'source', got {role!r}")
    per_slot = trace.relay_per_slot if role == "relay" else trace.source_per_slot
    w0, w1 = steady_window(trace)
    period = max(ln.period for ln in trace.lanes)
    window = sum(per_slot[t] for t in range(w0, w1))
    generations = (w1 - w0) // period
    return TransmissionCount(
        total=sum(per_slot.values()),
        window=window,
        generations=generations,
        per_generation=Fraction(window, generations),
    )


def analytic_relay_counts(trees: Iterable[CodingTree]) -> tuple[int, int]:
    """Relay broadcasts per two slots: (network coding, routing).

    Line relays carry two messages per slot (coding sends one combination);
    star-type relays carry three messages per two slots (coding sends two).
    """
    coding = routing = 0
    for tree in trees:
        relays = len(tree.relays())
        if tree.star_type:
            coding += 2 * relays
            routing += 3 * relays
        else:
            coding += 2 * relays
            routing += 4 * relays
    return coding, routing
