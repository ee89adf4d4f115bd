# =========================
# FastAPI app + endpoints
# graph analysis, decomposition, simulation, stored sweeps
# =========================

from fractions import Fraction

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field
from sqlalchemy.orm import Session

from src.config import DELAY_BOUND, FIELD_BITS, SEED
from src.db import SessionLocal, init_db
from src.decompose import decompose_multicast, dump_blocks, dump_decomposition, multicast_rate, unicast_corner
from src.errors import ArgumentError, DecompositionError, InfeasibleError, ParseError, ProtocolViolation
from src.graph_core import WiredGraph, compute_metrics, parse_graph, split_relays
from src.repository import get_run_metrics, list_runs
from src.simulator import (
    ASYNC,
    MULTICAST,
    SYNC,
    UNICAST,
    DelayModel,
    count_transmissions,
    decomposition_config,
    run,
    run_routing_baseline,
    unicast_config,
    verify_rt,
)

# =========================
# APP
# =========================

app = FastAPI()
app.add_middleware(
    CORSMiddleware,
    allow_origins=[
        "http://localhost:5173",
        "http://127.0.0.1:5173",
    ],
    allow_methods=["GET", "POST", "OPTIONS"],
    allow_headers=["*"],
    allow_credentials=False,
)


@app.on_event("startup")
def startup():
    init_db()


# =========================
# TYPES
# =========================

class GraphRequest(BaseModel):
    graph: str
    sources: list[int] | None = None


class TransformResponse(BaseModel):
    wired: str
    arcs: int


class MinCutResponse(BaseModel):
    cuts: dict[str, int]
    h: int
    max_distance: int
    capacity: int


class DecomposeRequest(GraphRequest):
    session: str = MULTICAST
    anchor: list[int] | None = None


class DecomposeResponse(BaseModel):
    session: str
    dump: str
    rate: str
    exact: bool


class SimulateRequest(DecomposeRequest):
    mode: str = SYNC
    delay_bound: int = Field(DELAY_BOUND, ge=1)
    horizon: int = Field(60, ge=1)
    field_bits: int = Field(FIELD_BITS, ge=1)
    seed: int = SEED
    fifo: bool = False
    routing: bool = False
    include_trace: bool = False


class SimulateResponse(BaseModel):
    summary: str
    rt_passed: bool
    worst_slack: int | None
    relay_per_generation: str | None
    counters: str
    trace: str | None = None


class RunOut(BaseModel):
    id: int
    command: str
    session_type: str
    seed: int
    field_bits: int
    polynomial: str
    delay_bound: int
    created_at: str


class MetricOut(BaseModel):
    n: int
    p: float
    seed: int
    metric: str
    value: float
    exact_flag: str


# =========================
# HELPERS
# =========================

def _wired(req: GraphRequest) -> WiredGraph:
    try:
        return split_relays(parse_graph(req.graph, req.sources))
    except ParseError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


def _fail(exc: Exception):
    if isinstance(exc, (ArgumentError, ParseError)):
        raise HTTPException(status_code=400, detail=str(exc))
    if isinstance(exc, InfeasibleError):
        raise HTTPException(status_code=422, detail={"error": str(exc), "constraint": exc.constraint_id})
    if isinstance(exc, DecompositionError):
        raise HTTPException(status_code=500, detail={"error": str(exc), "graph": exc.graph_text})
    raise HTTPException(status_code=500, detail=str(exc))


# =========================
# API
# =========================

@app.get("/health")
def health_check():
    return {"status": "ok"}


@app.post("/transform", response_model=TransformResponse)
def transform(request: GraphRequest):
    g = _wired(request)
    return TransformResponse(wired=g.to_text(), arcs=len(g.arcs))


@app.post("/mincut", response_model=MinCutResponse)
def mincut(request: GraphRequest):
    g = _wired(request)
    try:
        m = compute_metrics(g)
    except ArgumentError as exc:
        _fail(exc)
    cuts = {
        f"{','.join(map(str, sorted(a)))}->{','.join(map(str, sorted(b)))}": v
        for (a, b), v in m.min_cuts.items()
    }
    return MinCutResponse(cuts=cuts, h=m.h, max_distance=m.max_distance, capacity=m.capacity)


@app.post("/decompose", response_model=DecomposeResponse)
def decompose(request: DecomposeRequest):
    g = _wired(request)
    try:
        if request.session == MULTICAST:
            d = decompose_multicast(g)
            return DecomposeResponse(session=MULTICAST, dump=dump_decomposition(d), rate=str(multicast_rate(d)), exact=d.exact)
        if request.session == UNICAST:
            anchor = tuple(request.anchor or sorted(g.sources)[:2])
            plan = unicast_corner(g, anchor)
            head = f"unicast anchor={plan.anchor} hub={plan.hub} corner={plan.corner()}"
            return DecomposeResponse(
                session=UNICAST,
                dump=dump_blocks(g, plan.blocks(), head),
                rate=",".join(map(str, plan.corner())),
                exact=plan.exact,
            )
    except (ArgumentError, InfeasibleError, DecompositionError) as exc:
        _fail(exc)
    raise HTTPException(status_code=400, detail=f"unsupported session {request.session!r}")


@app.post("/simulate", response_model=SimulateResponse)
def simulate(request: SimulateRequest):
    if request.mode not in (SYNC, ASYNC):
        raise HTTPException(status_code=400, detail="mode must be 'sync' or 'async'")
    g = _wired(request)
    try:
        delay = DelayModel(
            bound=1 if request.mode == SYNC else request.delay_bound,
            distribution="fixed" if request.mode == SYNC else "uniform",
            fifo=request.fifo,
        )
        common = dict(mode=request.mode, horizon=request.horizon, delay=delay, field_bits=request.field_bits, seed=request.seed)
        if request.session == UNICAST:
            anchor = tuple(request.anchor or sorted(g.sources)[:2])
            cfg = unicast_config(unicast_corner(g, anchor), **common)
        else:
            cfg = decomposition_config(decompose_multicast(g), **common)
        trace = run_routing_baseline(cfg) if request.routing else run(cfg)
    except (ArgumentError, InfeasibleError, DecompositionError, ProtocolViolation) as exc:
        _fail(exc)

    report = verify_rt(trace)
    per_gen: Fraction | None = None
    try:
        per_gen = count_transmissions(trace, "relay").per_generation
    except ArgumentError:
        pass
    return SimulateResponse(
        summary=trace.summary_line(),
        rt_passed=report.passed,
        worst_slack=min(report.slack.values(), default=None),
        relay_per_generation=None if per_gen is None else str(per_gen),
        counters=trace.counters_csv(),
        trace=trace.to_text() if request.include_trace else None,
    )


@app.get("/runs", response_model=list[RunOut])
def runs(limit: int = 50):
    db: Session = SessionLocal()
    try:
        return [
            RunOut(
                id=r.id,
                command=r.command,
                session_type=r.session_type,
                seed=r.seed,
                field_bits=r.field_bits,
                polynomial=r.polynomial,
                delay_bound=r.delay_bound,
                created_at=str(r.created_at),
            )
            for r in list_runs(db, limit)
        ]
    finally:
        db.close()


@app.get("/runs/{run_id}/metrics", response_model=list[MetricOut])
def run_metrics(run_id: int, metric: str | None = None):
    db: Session = SessionLocal()
    try:
        rows = get_run_metrics(db, run_id, metric)
        if not rows:
            raise HTTPException(status_code=404, detail="Run not found or has no metrics")
        return [
            MetricOut(n=r.n, p=r.p, seed=r.seed, metric=r.metric, value=r.value, exact_flag=r.exact_flag)
            for r in rows
        ]
    finally:
        db.close()
