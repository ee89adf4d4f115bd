from __future__ import annotations

from fractions import Fraction

import pytest
from fastapi.testclient import TestClient

from src.db import SessionLocal, init_db
from src.experiments import ExperimentSpec, ResultRow, SweepResult
from src.repository import create_run_with_metrics, get_run_metrics, list_runs
from src.sim_api import app

from tests.test_cli import RING_AND_STAR, UNICAST

STAR = "nodes 4 sources 1,2,3 capacity 1\nedge 1 4\nedge 2 4\nedge 3 4\n"


@pytest.fixture
def client():
    with TestClient(app) as c:
        yield c


@pytest.fixture
def db():
    init_db()
    session = SessionLocal()
    try:
        yield session
    finally:
        session.close()


def _stored_run(db):
    spec = ExperimentSpec(sizes=(8,), graphs_per_size=1, session="multicast", seed=9)
    rows = [
        ResultRow(8, 0.5, 77, "h", 2, True),
        ResultRow(8, 0.5, 77, "multicast_rate", Fraction(1), True),
        ResultRow(8, 0.5, 77, "multicast_relay_ratio", Fraction(2, 3), False),
    ]
    return create_run_with_metrics(db, SweepResult(spec, rows), 8, "x^8 + x^4 + x^3 + x^2 + 1")


def test_health(client):
    assert client.get("/health").json() == {"status": "ok"}


def test_transform_and_mincut(client):
    body = client.post("/transform", json={"graph": RING_AND_STAR}).json()
    assert body["arcs"] == 13
    cuts = client.post("/mincut", json={"graph": RING_AND_STAR}).json()
    assert cuts["cuts"]["1->2"] == 3
    assert cuts["cuts"]["1->2,3"] == 3
    assert cuts["h"] == 3


def test_bad_graph_is_a_400(client):
    res = client.post("/mincut", json={"graph": "edge 1 2\n"})
    assert res.status_code == 400
    assert "line 1" in res.json()["detail"]


def test_decompose(client):
    body = client.post("/decompose", json={"graph": RING_AND_STAR}).json()
    assert body["rate"] == "3/2"
    assert body["exact"] is True
    assert "block 1 type linestar edges 3,4,5" in body["dump"]

    uni = client.post("/decompose", json={"graph": UNICAST, "session": "unicast", "anchor": [1, 3]}).json()
    assert uni["rate"] == "2,3,0"

    res = client.post("/decompose", json={"graph": RING_AND_STAR, "session": "combined"})
    assert res.status_code == 400


def test_simulate_star(client):
    body = client.post("/simulate", json={"graph": STAR, "horizon": 40}).json()
    assert body["rt_passed"] is True
    assert body["worst_slack"] >= 0
    assert body["relay_per_generation"] == "2"
    assert body["trace"] is None
    assert body["summary"].startswith("summary: relay_tx=")

    routed = client.post("/simulate", json={"graph": STAR, "horizon": 40, "routing": True}).json()
    assert routed["relay_per_generation"] == "3"


def test_simulate_async_with_trace(client):
    body = client.post(
        "/simulate", json={"graph": STAR, "mode": "async", "delay_bound": 2, "seed": 1, "include_trace": True}
    ).json()
    assert body["rt_passed"] is True
    assert body["trace"].startswith("# mode=async")


def test_simulate_errors(client):
    assert client.post("/simulate", json={"graph": STAR, "mode": "warp"}).status_code == 400
    res = client.post("/simulate", json={"graph": STAR, "field_bits": 1})
    assert res.status_code == 422
    assert res.json()["detail"]["constraint"] is None


def test_repository_round_trip(db):
    run = _stored_run(db)
    assert run.id is not None
    assert len(run.metrics) == 3
    assert list_runs(db, limit=1)[0].id == run.id
    rows = get_run_metrics(db, run.id, "multicast_relay_ratio")
    assert [(r.value, r.exact_flag) for r in rows] == [(pytest.approx(2 / 3), "heuristic")]


def test_runs_endpoints(client, db):
    run = _stored_run(db)
    listed = client.get("/runs").json()
    assert any(r["id"] == run.id and r["session_type"] == "multicast" for r in listed)

    metrics = client.get(f"/runs/{run.id}/metrics", params={"metric": "h"}).json()
    assert metrics == [{"n": 8, "p": 0.5, "seed": 77, "metric": "h", "value": 2.0, "exact_flag": "exact"}]
    assert client.get("/runs/999999/metrics").status_code == 404


def test_local_helper_upload():
    from src.tools.local_helper import app as helper

    with TestClient(helper) as c:
        res = c.post("/graph-file", files={"file": ("net.txt", RING_AND_STAR.encode(), "text/plain")})
        body = res.json()
        assert body["status"] == "ready"
        assert (body["h"], body["rate"]) == (3, "3/2")
        assert body["dump"].startswith("# decomposition h=3")

        two = c.post("/graph-file", data={"sources": "1,2"}, files={"file": ("net.txt", RING_AND_STAR.encode())})
        assert two.json()["rate"] is None

        bad = c.post("/graph-file", files={"file": ("bad.txt", b"edge 1 2\n")})
        assert bad.status_code == 400


@pytest.mark.parametrize(
    "url,expected",
    [
        ("postgres://u@h/db", "postgresql+psycopg://u@h/db"),
        ("postgresql://u@h/db", "postgresql+psycopg://u@h/db"),
        ("sqlite:///runs.db", "sqlite:///runs.db"),
    ],
)
def test_database_url_is_normalized(url, expected):
    from src.db import normalize_url

    assert normalize_url(url) == expected
