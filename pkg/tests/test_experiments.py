from __future__ import annotations

from fractions import Fraction

import pytest

from src.errors import ArgumentError, DecompositionError
from src.experiments import (
    ExperimentSpec,
    ResultRow,
    SweepResult,
    edge_probabilities,
    generate_er,
    graph_seed,
    run_graph,
    run_sweep,
    trend_report,
)


def test_er_extremes():
    assert generate_er(5, 0.0, 1).edges == ()
    k4 = generate_er(4, 1.0, 0)
    assert len(k4.edges) == 6
    assert k4.sources == (1, 2, 3)
    assert k4.relays == (4,)


def test_er_is_seeded():
    assert generate_er(12, 0.3, 42).edges == generate_er(12, 0.3, 42).edges
    assert graph_seed(0, 16, 3) == graph_seed(0, 16, 3)
    assert graph_seed(0, 16, 3) != graph_seed(1, 16, 3)


def test_er_rejects_bad_input():
    with pytest.raises(ArgumentError):
        generate_er(2, 0.5, 0)
    with pytest.raises(ArgumentError):
        generate_er(6, 1.5, 0)


def test_edge_probabilities():
    assert edge_probabilities(9, 3) == [0.25, 0.625, 1.0]
    assert edge_probabilities(9, 1) == [0.625]
    assert edge_probabilities(4, 2)[-1] == 1.0


def test_spec_validation():
    with pytest.raises(ArgumentError):
        ExperimentSpec(session="broadcast")
    with pytest.raises(ArgumentError):
        ExperimentSpec(sizes=(3,), session="multicast")
    with pytest.raises(ArgumentError):
        ExperimentSpec(graphs_per_size=0)
    assert ExperimentSpec(sizes=(3,), session="unicast").sizes == (3,)


def test_complete_graph_rows():
    rows = {r.metric: r for r in run_graph(4, 1.0, 0, "combined")}
    assert rows["rings"].value == 1
    assert rows["linestars"].value == 1
    assert rows["h"].value == 3
    assert rows["multicast_rate"].value == Fraction(3, 2)
    assert rows["multicast_relay_ratio"].value == Fraction(2, 3)
    assert (rows["multicast_relay_tx_coding"].value, rows["multicast_relay_tx_routing"].value) == (2, 3)
    assert rows["paths_12"].value == 3
    assert rows["paths_13"].value == 0
    assert rows["unicast_relay_ratio"].value == Fraction(1, 2)
    assert all(r.exact for r in rows.values())


def test_row_csv():
    row = ResultRow(8, 0.25, 11, "multicast_rate", Fraction(3, 2), True)
    assert row.csv() == "8,0.250000,11,multicast_rate,1.500000,exact"
    assert ResultRow(8, 0.25, 11, "h", 2, False).csv().endswith(",h,2,heuristic")


def test_small_sweep_writes_files(tmp_path):
    spec = ExperimentSpec(sizes=(6, 8), graphs_per_size=2, session="unicast", out_dir=str(tmp_path))
    result = run_sweep(spec)
    assert {r.n for r in result.rows} == {6, 8}
    csv = (tmp_path / "unicast_sweep.csv").read_text().splitlines()
    assert csv[0] == "n,p,seed,metric,value,exact_flag"
    assert len(csv) == len(result.rows) + 1
    dat = (tmp_path / "unicast_sweep.dat").read_text().splitlines()
    assert dat[0].startswith("# session=unicast")
    assert [line.split()[0] for line in dat[2:]] == ["6", "8"]


def test_sweep_is_reproducible():
    spec = ExperimentSpec(sizes=(6,), graphs_per_size=2, session="unicast", seed=5)
    assert run_sweep(spec).to_csv() == run_sweep(spec).to_csv()


def test_trend_report_on_handmade_rows():
    spec = ExperimentSpec(sizes=(8, 16), graphs_per_size=1, session="combined")
    rows = [
        ResultRow(8, 0.5, 1, "paths_12", 2, True),
        ResultRow(8, 0.5, 1, "paths_13", 1, True),
        ResultRow(16, 0.5, 1, "paths_12", 1, True),
        ResultRow(16, 0.5, 1, "paths_13", 3, True),
        ResultRow(8, 0.5, 1, "rings", 2, True),
        ResultRow(16, 0.5, 1, "rings", 1, True),
        ResultRow(8, 0.5, 1, "unicast_relay_ratio", Fraction(1, 2), True),
        ResultRow(8, 0.5, 1, "multicast_relay_ratio", Fraction(2, 3), True),
        ResultRow(16, 0.5, 1, "multicast_relay_ratio", Fraction(1, 2), True),
    ]
    report = trend_report(SweepResult(spec, rows))
    assert report.paths_order_share == Fraction(1, 2)
    assert report.monotone["paths_13"] is True
    assert report.monotone["rings"] is False
    assert report.unicast_ratio == {Fraction(1, 2)}
    assert report.multicast_ratio == (Fraction(1, 2), Fraction(2, 3))


@pytest.mark.slow
def test_relay_ratios_on_a_sweep():
    spec = ExperimentSpec(sizes=(8, 16), graphs_per_size=3, session="combined", seed=3)
    report = trend_report(run_sweep(spec))
    assert report.unicast_ratio <= {Fraction(1, 2)}
    if report.multicast_ratio is not None:
        low, high = report.multicast_ratio
        assert Fraction(1, 2) <= low <= high <= Fraction(2, 3)


def test_sweep_survives_a_failed_decomposition(monkeypatch):
    def broken(g, *args, **kwargs):
        raise DecompositionError("2|R|+|Q| = 1 is below h = 2", g.wireless.to_text())

    monkeypatch.setattr("src.experiments.decompose_multicast", broken)
    result = run_sweep(ExperimentSpec(sizes=(6,), graphs_per_size=2, session="multicast", seed=4))
    failed = [r for r in result.rows if r.metric == "multicast_failed"]
    assert len(failed) == 2
    assert all(r.value == 1 and not r.exact for r in failed)
    assert "multicast_failed" in result.to_dat()


# graphs the greedy block search alone could not decompose
@pytest.mark.slow
@pytest.mark.parametrize("k,seed", [(5, 1140466588), (6, 2581799524), (9, 4199216649)])
def test_hard_graphs_decompose(k, seed):
    p = edge_probabilities(16, 10)[k]
    rows = {r.metric: r for r in run_graph(16, p, seed, "multicast")}
    assert "multicast_failed" not in rows
    assert 2 * rows["rings"].value + rows["linestars"].value == rows["h"].value
    assert rows["multicast_rate"].value == Fraction(rows["h"].value, 2)
    assert Fraction(1, 2) <= rows["multicast_relay_ratio"].value <= Fraction(2, 3)


@pytest.mark.slow
def test_trends_over_growing_graphs():
    spec = ExperimentSpec(sizes=(8, 16, 32), graphs_per_size=4, session="combined", seed=11)
    result = run_sweep(spec)
    assert not [r for r in result.rows if r.metric == "multicast_failed"]
    report = trend_report(result)
    assert report.paths_order_share == 1
    assert report.unicast_ratio <= {Fraction(1, 2)}
    low, high = report.multicast_ratio
    assert Fraction(1, 2) <= low <= high <= Fraction(2, 3)
    assert set(report.monotone) >= {"rings", "linestars", "h"}
