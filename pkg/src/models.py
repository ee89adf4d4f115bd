from sqlalchemy import JSON, DateTime, Float, ForeignKey, Integer, String, func
from sqlalchemy.orm import Mapped, mapped_column, relationship

from src.db import Base


class ExperimentRun(Base):
    __tablename__ = "experiment_runs"

    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    command: Mapped[str] = mapped_column(String, nullable=False)
    session_type: Mapped[str] = mapped_column(String, nullable=False)
    seed: Mapped[int] = mapped_column(Integer, nullable=False)
    field_bits: Mapped[int] = mapped_column(Integer, nullable=False)
    polynomial: Mapped[str] = mapped_column(String, nullable=False)
    delay_bound: Mapped[int] = mapped_column(Integer, nullable=False)
    meta: Mapped[dict] = mapped_column(JSON, nullable=False, default=dict)
    created_at: Mapped[DateTime] = mapped_column(DateTime(timezone=True), server_default=func.now())

    metrics: Mapped[list["MetricRow"]] = relationship(
        "MetricRow", back_populates="run", cascade="all, delete-orphan", order_by="MetricRow.id"
    )

    def __repr__(self) -> str:
        return f"<ExperimentRun(id={self.id}, command={self.command!r}, seed={self.seed})>"


class MetricRow(Base):
    __tablename__ = "metric_rows"

    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    run_id: Mapped[int] = mapped_column(Integer, ForeignKey("experiment_runs.id"), index=True, nullable=False)
    n: Mapped[int] = mapped_column(Integer, nullable=False)
    p: Mapped[float] = mapped_column(Float, nullable=False)
    seed: Mapped[int] = mapped_column(Integer, nullable=False)
    metric: Mapped[str] = mapped_column(String, index=True, nullable=False)
    value: Mapped[float] = mapped_column(Float, nullable=False)
    exact_flag: Mapped[str] = mapped_column(String, nullable=False)

    run: Mapped["ExperimentRun"] = relationship("ExperimentRun", back_populates="metrics")

    def __repr__(self) -> str:
        return f"<MetricRow(run_id={self.run_id}, n={self.n}, metric={self.metric!r})>"
