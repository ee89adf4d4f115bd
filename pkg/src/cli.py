# src/cli.py
# --------------------------------------------
# Command-line front end.
#
#   python -m src.cli transform  --graph net.txt
#   python -m src.cli mincut     --graph net.txt --sources 1,2,3
#   python -m src.cli decompose  --graph net.txt --session multicast
#   python -m src.cli simulate   --topology star --mode async --delay-bound 3
#   python -m src.cli experiment --sizes 8,16,32 --session unicast --out runs/
#
# Data (graphs, dumps, traces, CSV) goes to stdout or --out; progress goes
# to stderr. Exit codes: 0 ok, 1 usage, 2 infeasible, 3 internal assertion.

import argparse
import contextlib
import sys
from pathlib import Path

from src.codec import LINESTAR_KIND
from src.config import DELAY_BOUND, FIELD_BITS, SEED
from src.decompose import (
    combined_corners,
    decompose_multicast,
    dump_blocks,
    dump_decomposition,
    multicast_rate,
    unicast_bound_ok,
    unicast_corner,
)
from src.errors import ArgumentError, DecompositionError, InfeasibleError, ParseError, ProtocolViolation
from src.experiments import DEFAULT_SIZES, ExperimentSpec, run_sweep, trend_report
from src.finite_field import field_for
from src.graph_core import WiredGraph, compute_metrics, parse_graph, split_relays
from src.simulator import (
    ASYNC,
    COMBINED,
    MULTICAST,
    SYNC,
    UNICAST,
    DelayModel,
    SimConfig,
    count_transmissions,
    decomposition_config,
    line_config,
    linestar_config,
    run_routing_baseline,
    star_config,
    unicast_config,
    verify_rt,
)
from src.simulator import run as run_simulation

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_INTERNAL = 3


def _int_list(raw: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in raw.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {raw!r}")


def _progress(msg: str):
    print(msg, file=sys.stderr)


def _load(args) -> WiredGraph:
    if not args.graph:
        raise ArgumentError("--graph is required for this command")
    text = Path(args.graph).read_text()
    wireless = parse_graph(text, args.sources)
    return split_relays(wireless)


def _anchor(raw: tuple[int, ...] | None, g: WiredGraph) -> tuple[int, int]:
    if raw is None:
        s = sorted(g.sources)
        return s[0], s[1]
    if len(raw) != 2:
        raise ArgumentError(f"--anchor takes two sources, got {raw}")
    return raw[0], raw[1]


def _emit(text: str, out_dir: str | None, name: str):
    if out_dir:
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        (path / name).write_text(text)
        _progress(f"✅ Wrote {path / name}")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_transform(args) -> int:
    g = _load(args)
    _emit(g.to_text(), args.out, "wired.txt")
    return EXIT_OK


def cmd_mincut(args) -> int:
    g = _load(args)
    m = compute_metrics(g)
    lines = [f"# capacity {m.capacity} sources {','.join(map(str, m.sources))}"]
    for (a, b), v in sorted(m.min_cuts.items(), key=lambda kv: (sorted(kv[0][0]), sorted(kv[0][1]))):
        lines.append(f"cut {','.join(map(str, sorted(a)))} -> {','.join(map(str, sorted(b)))} = {v}")
    lines.append(f"h = {m.h}")
    lines.append(f"max_distance = {m.max_distance}")
    _emit("\n".join(lines) + "\n", args.out, "mincut.txt")
    return EXIT_OK


def cmd_decompose(args) -> int:
    g = _load(args)
    _progress(f"🔧 Decomposing {g!r} for a {args.session} session")
    if args.session == MULTICAST:
        d = decompose_multicast(g)
        text = dump_decomposition(d)
        _progress(f"✅ rate {multicast_rate(d)} per source, {len(d.rings)} rings, {len(d.linestars)} line-stars")
    elif args.session == UNICAST:
        plan = unicast_corner(g, _anchor(args.anchor, g))
        rates = {k: plan.rate(*k) for k in plan.families}
        if not unicast_bound_ok(g, rates):
            raise DecompositionError("unicast corner breaks the per-source cut bound", g.wireless.to_text())
        head = f"unicast anchor={plan.anchor} hub={plan.hub} corner={plan.corner()} {'exact' if plan.exact else 'heuristic'}"
        text = dump_blocks(g, plan.blocks(), head)
    else:
        parts = []
        for k, corner in enumerate(combined_corners(g)):
            rates = ",".join(f"{a}{b}:{v}" for (a, b), v in sorted(corner.unicast.items()))
            parts.append(f"# corner {k}: multicast={corner.multicast} unicast={rates}")
            blocks = corner.decomposition.blocks if corner.decomposition else corner.plan.blocks()
            parts.append(dump_blocks(g, blocks).rstrip("\n"))
        text = "\n".join(parts) + "\n"
    _emit(text, args.out, f"{args.session}_blocks.txt")
    return EXIT_OK


def _delay_model(args) -> DelayModel:
    distribution = args.delay or ("fixed" if args.mode == SYNC else "uniform")
    return DelayModel(
        bound=1 if args.mode == SYNC else args.delay_bound,
        distribution=distribution,
        fifo=args.fifo,
        delays=args.delays or (),
        fill=args.fill,
    )


def _sim_config(args) -> SimConfig:
    common = dict(
        mode=args.mode,
        horizon=args.horizon,
        delay=_delay_model(args),
        field_bits=args.field_bits,
        seed=args.seed,
        retention=args.retention,
    )
    if args.topology == "line":
        return line_config(args.nodes, **common)
    if args.topology == "star":
        return star_config(**common)
    if args.topology == LINESTAR_KIND:
        return linestar_config(args.arms or (2, 1, 1), **common)

    g = _load(args)
    if args.session == MULTICAST:
        return decomposition_config(decompose_multicast(g), **common)
    if args.session == UNICAST:
        return unicast_config(unicast_corner(g, _anchor(args.anchor, g)), **common)
    corner = combined_corners(g)[-1]
    return decomposition_config(corner.decomposition, session=COMBINED, **common)


def cmd_simulate(args) -> int:
    cfg = _sim_config(args)
    _progress(f"🔧 Simulating {len(cfg.blocks)} block tree(s), mode {cfg.mode}, D={cfg.D}, T={cfg.horizon}")
    trace = run_routing_baseline(cfg) if args.routing else run_simulation(cfg)
    report = verify_rt(trace)

    _emit(trace.to_text(), args.out, "trace.txt")
    if args.out:
        _emit(trace.counters_csv(), args.out, "counters.csv")
    with contextlib.suppress(ArgumentError):
        relay = count_transmissions(trace, "relay")
        _progress(f"   relay broadcasts per generation at steady state: {relay.per_generation}")

    if not report.passed:
        for ev_id, msg in report.failures[:10]:
            _progress(f"❌ {msg}" + (f" (event {ev_id})" if ev_id is not None else ""))
        return EXIT_INTERNAL
    _progress(f"✅ every message met its deadline; worst slack {min(report.slack.values(), default=0)}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    spec = ExperimentSpec(
        sizes=args.sizes or DEFAULT_SIZES,
        graphs_per_size=args.graphs,
        session=args.session,
        delay_bound=args.delay_bound,
        seed=args.seed,
        out_dir=args.out,
        workers=args.workers,
    )
    with contextlib.redirect_stdout(sys.stderr):
        result = run_sweep(spec)
        report = trend_report(result)
    if not args.out:
        sys.stdout.write(result.to_csv())
    if report.paths_order_share is not None:
        _progress(f"   mean |P12| >= mean |P13| on {report.paths_order_share} of sizes")
    if report.multicast_ratio is not None:
        lo, hi = report.multicast_ratio
        _progress(f"   multicast coding/routing relay ratio in [{lo}, {hi}]")

    if args.store:
        from src.db import SessionLocal, init_db
        from src.repository import create_run_with_metrics

        with contextlib.redirect_stdout(sys.stderr):
            init_db()
        gf = field_for(args.field_bits)
        db = SessionLocal()
        try:
            run = create_run_with_metrics(db, result, args.field_bits, gf.poly_str)
            _progress(f"🗄️ Stored run {run.id} with {len(result.rows)} rows")
        finally:
            db.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtnc", description="Real-time network coding over wireless networks")
    sub = parser.add_subparsers(dest="command", required=True)

    def graph_flags(p):
        p.add_argument("--graph", help="graph text file")
        p.add_argument("--sources", type=_int_list, help="override the graph's sources, e.g. 1,2,3")
        p.add_argument("--out", help="output directory (default: stdout)")

    p = sub.add_parser("transform", help="print the node-split wired graph")
    graph_flags(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("mincut", help="pairwise and source-set min-cuts, h, longest path")
    graph_flags(p)
    p.set_defaults(func=cmd_mincut)

    p = sub.add_parser("decompose", help="carve the graph into coding blocks")
    graph_flags(p)
    p.add_argument("--session", choices=(MULTICAST, UNICAST, COMBINED), default=MULTICAST)
    p.add_argument("--anchor", type=_int_list, help="unicast anchor pair, e.g. 1,2")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("simulate", help="run coding blocks over delayed links and write the trace")
    graph_flags(p)
    p.add_argument("--topology", choices=("line", "star", LINESTAR_KIND), help="built-in topology instead of --graph")
    p.add_argument("--nodes", type=int, default=4, help="line length M")
    p.add_argument("--arms", type=_int_list, help="line-star arm lengths, e.g. 2,1,1")
    p.add_argument("--session", choices=(MULTICAST, UNICAST, COMBINED), default=MULTICAST)
    p.add_argument("--anchor", type=_int_list)
    p.add_argument("--mode", choices=(SYNC, ASYNC), default=SYNC)
    p.add_argument("--delay-bound", type=int, default=DELAY_BOUND)
    p.add_argument("--delay", choices=("uniform", "fixed", "adversarial"))
    p.add_argument("--delays", type=_int_list, help="adversarial delay sequence")
    p.add_argument("--fill", type=int, default=1, help="adversarial delay after the sequence runs out")
    p.add_argument("--fifo", action="store_true")
    p.add_argument("--horizon", type=int, default=60)
    p.add_argument("--field-bits", type=int, default=FIELD_BITS)
    p.add_argument("--seed", type=int, default=SEED)
    p.add_argument("--retention", action="store_true", help="evict decoded messages outside the delay window")
    p.add_argument("--routing", action="store_true", help="store-and-forward baseline instead of coding")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="Erdős–Rényi sweep")
    p.add_argument("--sizes", type=_int_list)
    p.add_argument("--graphs", type=int, default=10)
    p.add_argument("--session", choices=(MULTICAST, UNICAST, COMBINED), default=MULTICAST)
    p.add_argument("--delay-bound", type=int, default=DELAY_BOUND)
    p.add_argument("--field-bits", type=int, default=FIELD_BITS)
    p.add_argument("--seed", type=int, default=SEED)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--store", action="store_true", help="persist the rows to DATABASE_URL")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE

    try:
        return args.func(args)
    except (ArgumentError, ParseError, FileNotFoundError) as exc:
        _progress(f"❌ {exc}")
        return EXIT_USAGE
    except InfeasibleError as exc:
        where = f" [{exc.constraint_id}]" if exc.constraint_id else ""
        _progress(f"❌ infeasible: {exc}{where}")
        return EXIT_INFEASIBLE
    except DecompositionError as exc:
        _progress(f"❌ {exc}")
        if exc.graph_text:
            _progress("--- graph for reproduction ---")
            _progress(exc.graph_text.rstrip("\n"))
        return EXIT_INTERNAL
    except (ProtocolViolation, AssertionError) as exc:
        _progress(f"❌ {exc}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
