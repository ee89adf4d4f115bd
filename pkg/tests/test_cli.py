from __future__ import annotations

import pytest

from src import cli
from src.errors import DecompositionError

RING_AND_STAR = """\
# triangle of sources plus relay 4
nodes 4 sources 1,2,3 capacity 1
edge 1 2
edge 2 3
edge 1 3
edge 1 4
edge 2 4
edge 3 4
"""

UNICAST = """\
nodes 4 sources 1,2,3 capacity 1
edge 1 3 2
edge 1 4
edge 3 4
edge 1 2 2
"""


@pytest.fixture
def graph_file(tmp_path):
    def write(text, name="net.txt"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


def test_transform(graph_file, capsys):
    assert cli.main(["transform", "--graph", graph_file(RING_AND_STAR)]) == 0
    out = capsys.readouterr().out
    assert "arc 0 1 2 origin 0" in out
    assert "arc 12 4 4' origin -" in out


def test_mincut(graph_file, capsys):
    assert cli.main(["mincut", "--graph", graph_file(RING_AND_STAR)]) == 0
    out = capsys.readouterr().out
    assert "cut 1 -> 2 = 3" in out
    assert "h = 3" in out


def test_decompose_multicast(graph_file, capsys):
    assert cli.main(["decompose", "--graph", graph_file(RING_AND_STAR)]) == 0
    captured = capsys.readouterr()
    assert "block 0 type ring edges 0,1,2" in captured.out
    assert "block 1 type linestar edges 3,4,5" in captured.out
    assert "rate 3/2" in captured.err


def test_decompose_unicast(graph_file, capsys):
    assert cli.main(["decompose", "--graph", graph_file(UNICAST), "--session", "unicast", "--anchor", "1,3"]) == 0
    assert "corner=(2, 3, 0)" in capsys.readouterr().out


def test_decompose_writes_to_out(graph_file, tmp_path):
    out = tmp_path / "blocks"
    assert cli.main(["decompose", "--graph", graph_file(RING_AND_STAR), "--out", str(out)]) == 0
    assert (out / "multicast_blocks.txt").read_text().startswith("# decomposition h=3")


def test_simulate_star(capsys):
    assert cli.main(["simulate", "--topology", "star", "--horizon", "30"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# mode=sync")
    assert lines[-1].startswith("summary: relay_tx=30,")


def test_simulate_async_line_to_files(tmp_path):
    out = tmp_path / "run"
    argv = ["simulate", "--topology", "line", "--nodes", "4", "--mode", "async", "--delay-bound", "2", "--seed", "1", "--out", str(out)]
    assert cli.main(argv) == 0
    assert (out / "trace.txt").exists()
    assert (out / "counters.csv").read_text().startswith("counter,value\nrelay_tx,")


def test_simulate_over_gf2():
    assert cli.main(["simulate", "--topology", "line", "--nodes", "3", "--horizon", "20", "--field-bits", "1"]) == 0


def test_simulate_graph_file(graph_file):
    assert cli.main(["simulate", "--graph", graph_file(RING_AND_STAR), "--horizon", "30"]) == 0
    assert cli.main(["simulate", "--graph", graph_file(UNICAST), "--session", "unicast", "--anchor", "1,3"]) == 0


def test_usage_errors(graph_file, capsys):
    assert cli.main(["bogus"]) == 1
    assert cli.main(["simulate", "--mode", "warp"]) == 1
    assert cli.main(["decompose"]) == 1
    assert cli.main(["decompose", "--graph", "/nonexistent/net.txt"]) == 1
    assert cli.main(["simulate", "--topology", "line", "--mode", "async", "--delay", "adversarial", "--delays", "3"]) == 1


def test_parse_error_reports_the_line(graph_file, capsys):
    path = graph_file("nodes 3 sources 1,2,3 capacity 1\nedge 1 9\n")
    assert cli.main(["mincut", "--graph", path]) == 1
    assert "line 2" in capsys.readouterr().err


def test_two_sources_cannot_multicast(graph_file):
    path = graph_file("nodes 3 sources 1,3 capacity 1\nedge 1 2\nedge 2 3\n")
    assert cli.main(["decompose", "--graph", path]) == 1


def test_infeasible_field(capsys):
    assert cli.main(["simulate", "--topology", "star", "--field-bits", "1"]) == 2
    assert "infeasible" in capsys.readouterr().err


def test_internal_errors_print_the_graph(graph_file, capsys, monkeypatch):
    def broken(g, *args, **kwargs):
        raise DecompositionError("2|R|+|Q| = 0 is below h = 3", g.wireless.to_text())

    monkeypatch.setattr(cli, "decompose_multicast", broken)
    assert cli.main(["decompose", "--graph", graph_file(RING_AND_STAR)]) == 3
    err = capsys.readouterr().err
    assert "graph for reproduction" in err
    assert "edge 3 4" in err


def test_experiment_csv(capsys):
    assert cli.main(["experiment", "--sizes", "6", "--graphs", "1", "--session", "unicast"]) == 0
    captured = capsys.readouterr()
    assert captured.out.startswith("n,p,seed,metric,value,exact_flag\n")
    assert "Sweeping 1 graphs" in captured.err
