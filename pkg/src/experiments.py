# src/experiments.py
# --------------------------------------------
# Random-graph sweeps: Erdős–Rényi graphs of growing size, each decomposed
# for the session under study, reporting path-family sizes, block counts
# and relay transmission counts of coding against routing.
#
# Rows are `n,p,seed,metric,value,exact_flag`; the .dat file next to the CSV
# holds per-size averages for gnuplot.

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from pathlib import Path

import networkx as nx
import numpy as np

from src.config import DELAY_BOUND, EXACT_EDGE_BUDGET, EXACT_NODE_LIMIT, FIELD_BITS, SEED, dbg
from src.decompose import decompose_multicast, multicast_rate, unicast_corner
from src.errors import ArgumentError, DecompositionError, InfeasibleError
from src.graph_core import WirelessGraph, split_relays
from src.simulator import (
    COMBINED,
    MULTICAST,
    UNICAST,
    analytic_relay_counts,
    count_transmissions,
    decomposition_config,
    run,
    run_routing_baseline,
    unicast_config,
)

DEFAULT_SIZES = (8, 16, 32, 64, 128)
MIN_DEGREE = 2.0
MAX_DEGREE = 8.0


@dataclass(frozen=True)
class ExperimentSpec:
    sizes: tuple[int, ...] = DEFAULT_SIZES
    graphs_per_size: int = 10
    session: str = MULTICAST
    delay_bound: int = DELAY_BOUND
    seed: int = SEED
    out_dir: str | None = None
    workers: int = 1
    exact_node_limit: int = EXACT_NODE_LIMIT

    def __post_init__(self):
        if self.session not in (MULTICAST, UNICAST, COMBINED):
            raise ArgumentError(f"unknown session type {self.session!r}")
        if self.graphs_per_size < 1:
            raise ArgumentError("graphs_per_size must be >= 1")
        low = 3 if self.session == UNICAST else 4
        for n in self.sizes:
            if n < low:
                raise ArgumentError(f"{self.session} sweeps need at least {low} nodes, got {n}")


@dataclass(frozen=True)
class ResultRow:
    n: int
    p: float
    seed: int
    metric: str
    value: int | Fraction
    exact: bool

    def csv(self) -> str:
        return f"{self.n},{self.p:.6f},{self.seed},{self.metric},{_fmt(self.value)},{'exact' if self.exact else 'heuristic'}"


@dataclass
class SweepResult:
    spec: ExperimentSpec
    rows: list[ResultRow] = field(default_factory=list)

    def averages(self) -> dict[int, dict[str, Fraction]]:
        acc: dict[int, dict[str, list]] = {}
        for r in self.rows:
            acc.setdefault(r.n, {}).setdefault(r.metric, []).append(Fraction(r.value))
        return {n: {m: sum(v, Fraction(0)) / len(v) for m, v in per.items()} for n, per in sorted(acc.items())}

    def to_csv(self) -> str:
        return "n,p,seed,metric,value,exact_flag\n" + "".join(r.csv() + "\n" for r in self.rows)

    def to_dat(self) -> str:
        avgs = self.averages()
        metrics = sorted({m for per in avgs.values() for m in per})
        lines = [
            f"# session={self.spec.session} seed={self.spec.seed} D={self.spec.delay_bound} "
            f"graphs_per_size={self.spec.graphs_per_size} expected_degree={MIN_DEGREE:g}..{MAX_DEGREE:g}",
            "# n " + " ".join(metrics),
        ]
        for n, per in avgs.items():
            lines.append(f"{n} " + " ".join(_fmt(per[m]) if m in per else "nan" for m in metrics))
        return "\n".join(lines) + "\n"

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{self.spec.session}_sweep.csv"
        dat_path = out / f"{self.spec.session}_sweep.dat"
        csv_path.write_text(self.to_csv())
        dat_path.write_text(self.to_dat())
        return csv_path, dat_path


def _fmt(value) -> str:
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{float(value):.6f}"
    return str(value)


def generate_er(n: int, p: float, seed: int) -> WirelessGraph:
    """G(n, p) on nodes 1..n with sources 1, 2, 3."""
    if n < 3:
        raise ArgumentError(f"need at least 3 nodes for three sources, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ArgumentError(f"edge probability must be in [0, 1], got {p}")
    g = nx.gnp_random_graph(n, p, seed=seed)
    edges = sorted((u + 1, v + 1) for u, v in g.edges())
    return WirelessGraph.build(n, edges, (1, 2, 3))


def edge_probabilities(n: int, count: int) -> list[float]:
    """Edge probabilities whose expected degree spans MIN_DEGREE..MAX_DEGREE."""
    if count == 1:
        degrees = [(MIN_DEGREE + MAX_DEGREE) / 2]
    else:
        step = (MAX_DEGREE - MIN_DEGREE) / (count - 1)
        degrees = [MIN_DEGREE + k * step for k in range(count)]
    return [min(1.0, d / (n - 1)) for d in degrees]


def graph_seed(seed: int, n: int, k: int) -> int:
    return int(np.random.SeedSequence([seed, n, k]).generate_state(1)[0])


def _count_horizon(trees) -> int:
    """Synchronous horizon leaving at least two whole periods of steady state."""
    drain = max(t.L + t.c for t in trees)
    period = max(t.period for t in trees)
    return 2 * drain + 4 * period + 1


def _relay_rows(n, p, seed, make_config, trees, exact) -> list[ResultRow]:
    """Relay broadcasts per generation, coding against routing, from simulated traces."""
    if not trees:
        return [
            ResultRow(n, p, seed, "relay_tx_coding", 0, exact),
            ResultRow(n, p, seed, "relay_tx_routing", 0, exact),
        ]
    cfg = make_config(horizon=_count_horizon(trees), field_bits=FIELD_BITS, seed=seed)
    coding = count_transmissions(run(cfg)).per_generation
    routing = count_transmissions(run_routing_baseline(cfg)).per_generation
    rows = [
        ResultRow(n, p, seed, "relay_tx_coding", coding, exact),
        ResultRow(n, p, seed, "relay_tx_routing", routing, exact),
    ]
    if routing:
        ratio = coding / routing
        a_coding, a_routing = analytic_relay_counts(trees)
        if a_routing and Fraction(a_coding, a_routing) != ratio:
            print(f"⚠️ n={n} p={p:.4f} seed={seed}: simulated relay ratio {ratio} differs from {a_coding}/{a_routing}")
        rows.append(ResultRow(n, p, seed, "relay_ratio", ratio, exact))
    return rows


def run_graph(n: int, p: float, seed: int, session: str, exact_node_limit: int = EXACT_NODE_LIMIT) -> list[ResultRow]:
    """All metric rows of one random graph."""
    wireless = generate_er(n, p, seed)
    g = split_relays(wireless)
    budget = len(g.arcs) if n <= exact_node_limit else EXACT_EDGE_BUDGET
    rows: list[ResultRow] = []

    plan = None
    if session in (UNICAST, COMBINED):
        try:
            plan = unicast_corner(g, (1, 2), budget)
        except (ArgumentError, InfeasibleError) as exc:
            print(f"⚠️ n={n} p={p:.4f} seed={seed}: no unicast corner ({exc})")
    if plan is not None:
        for a, b in ((1, 2), (1, 3), (2, 3)):
            rows.append(ResultRow(n, p, seed, f"paths_{a}{b}", plan.rate(a, b) // g.capacity, plan.exact))
        trees = [t for blk in plan.blocks() for t in blk.trees]
        rows += [
            ResultRow(r.n, r.p, r.seed, f"unicast_{r.metric}", r.value, r.exact)
            for r in _relay_rows(n, p, seed, partial(unicast_config, plan), trees, plan.exact)
        ]

    if session in (MULTICAST, COMBINED):
        try:
            d = decompose_multicast(g, budget)
            rate = multicast_rate(d) / g.capacity
        except DecompositionError as exc:
            print(f"⚠️ n={n} p={p:.4f} seed={seed}: multicast decomposition failed ({exc})")
            dbg(exc.graph_text)
            rows.append(ResultRow(n, p, seed, "multicast_failed", 1, False))
            return rows
        rows += [
            ResultRow(n, p, seed, "rings", len(d.rings), d.exact),
            ResultRow(n, p, seed, "linestars", len(d.linestars), d.exact),
            ResultRow(n, p, seed, "h", d.h, d.exact),
            ResultRow(n, p, seed, "multicast_rate", rate, d.exact),
        ]
        trees = [t for blk in d.blocks for t in blk.trees]
        rows += [
            ResultRow(r.n, r.p, r.seed, f"multicast_{r.metric}", r.value, r.exact)
            for r in _relay_rows(n, p, seed, partial(decomposition_config, d), trees, d.exact)
        ]
    return rows


def _job(args) -> list[ResultRow]:
    return run_graph(*args)


def run_sweep(spec: ExperimentSpec) -> SweepResult:
    jobs = []
    for n in spec.sizes:
        for k, p in enumerate(edge_probabilities(n, spec.graphs_per_size)):
            jobs.append((n, p, graph_seed(spec.seed, n, k), spec.session, spec.exact_node_limit))

    print(f"🔧 Sweeping {len(jobs)} graphs ({spec.session}, sizes {','.join(map(str, spec.sizes))})")
    result = SweepResult(spec)
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            for rows in pool.map(_job, jobs):
                result.rows += rows
    else:
        for job in jobs:
            dbg(f"   graph n={job[0]} p={job[1]:.4f} seed={job[2]}")
            result.rows += _job(job)

    if spec.out_dir:
        csv_path, dat_path = result.write(spec.out_dir)
        print(f"✅ Wrote {csv_path} and {dat_path}")
    return result


@dataclass(frozen=True)
class TrendReport:
    paths_order_share: Fraction | None
    monotone: dict[str, bool]
    unicast_ratio: set[Fraction]
    multicast_ratio: tuple[Fraction, Fraction] | None


def trend_report(result: SweepResult) -> TrendReport:
    """Share of sizes with mean |P12| >= mean |P13|, monotonicity per metric, ratio ranges."""
    avgs = result.averages()
    sizes = sorted(avgs)

    share = None
    with_paths = [n for n in sizes if "paths_12" in avgs[n]]
    if with_paths:
        good = sum(1 for n in with_paths if avgs[n]["paths_12"] >= avgs[n]["paths_13"])
        share = Fraction(good, len(with_paths))

    monotone = {}
    for metric in ("rings", "linestars", "h", "paths_12", "paths_13"):
        series = [avgs[n][metric] for n in sizes if metric in avgs[n]]
        if series:
            monotone[metric] = all(a <= b for a, b in zip(series, series[1:]))

    unicast = {Fraction(r.value) for r in result.rows if r.metric == "unicast_relay_ratio"}
    multi = [Fraction(r.value) for r in result.rows if r.metric == "multicast_relay_ratio"]
    report = TrendReport(share, monotone, unicast, (min(multi), max(multi)) if multi else None)
    for metric, ok in monotone.items():
        if not ok:
            print(f"⚠️ mean {metric} is not monotone in n for this sweep")
    return report
