from sqlalchemy import select
from sqlalchemy.orm import Session

from src.config import dbg
from src.experiments import SweepResult
from src.models import ExperimentRun, MetricRow


def create_run_with_metrics(
    db: Session,
    result: SweepResult,
    field_bits: int,
    polynomial: str,
    command: str = "experiment",
) -> ExperimentRun:
    spec = result.spec
    run = ExperimentRun(
        command=command,
        session_type=spec.session,
        seed=spec.seed,
        field_bits=field_bits,
        polynomial=polynomial,
        delay_bound=spec.delay_bound,
        meta={
            "sizes": list(spec.sizes),
            "graphs_per_size": spec.graphs_per_size,
            "exact_node_limit": spec.exact_node_limit,
        },
    )
    db.add(run)
    db.flush()
    dbg("[store] run.id=", run.id, "rows=", len(result.rows))

    db.add_all(
        MetricRow(
            run_id=run.id,
            n=r.n,
            p=r.p,
            seed=r.seed,
            metric=r.metric,
            value=float(r.value),
            exact_flag="exact" if r.exact else "heuristic",
        )
        for r in result.rows
    )
    db.commit()
    db.refresh(run)
    return run


def list_runs(db: Session, limit: int = 50) -> list[ExperimentRun]:
    stmt = select(ExperimentRun).order_by(ExperimentRun.id.desc()).limit(limit)
    return list(db.execute(stmt).scalars())


def get_run_metrics(db: Session, run_id: int, metric: str | None = None) -> list[MetricRow]:
    stmt = select(MetricRow).where(MetricRow.run_id == run_id)
    if metric:
        stmt = stmt.where(MetricRow.metric == metric)
    return list(db.execute(stmt.order_by(MetricRow.id)).scalars())
