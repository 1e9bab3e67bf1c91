import json

import pytest

from conflictfair.cli import main, parse_allocation_text, parse_is_graph
from conflictfair.core import Allocation
from conflictfair.errors import ValidationError
from conflictfair.instances import builtin, read_allocation, read_instance


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, "--quiet", *argv)
    return code, json.loads(out)


def test_solve_additive(capsys):
    code, rep = run_json(capsys, "solve", "--instance", "ex1_path4", "--algorithm", "additive")
    assert code == 0
    assert rep["pretty"] == "({o1,o4}, {o3})"
    assert set(rep["properties"]) >= {"ef1", "maximal"}


def test_solve_auto_bipartite(capsys):
    code, rep = run_json(capsys, "solve", "--instance", "ex3_path5_chores")
    assert code == 0 and rep["algorithm"] == "bipartite"
    assert rep["pretty"] == "({o1,o4}, {o2,o5})"


@pytest.mark.parametrize("name,needle", [("thm6_k33", "thm6"), ("nonmono_path2", "nonmono")])
def test_solve_known_nonexistence(capsys, name, needle):
    code, _, err = run(capsys, "solve", "--instance", name)
    assert code == 2
    assert "no solver" in err


def test_solve_three_agent_path(capsys, tmp_path):
    out = tmp_path / "a.json"
    code, rep = run_json(capsys, "solve", "--instance", "rr8_path", "--out", str(out))
    assert code == 0
    alloc = read_allocation(out)
    assert len(alloc) == 2
    code, _, _ = run(capsys, "gen", "--family", "path", "--m", "9", "--seed", "1", "--agents", "3",
                     "--out", str(tmp_path / "p.json"))
    code, rep = run_json(capsys, "solve", "--instance", str(tmp_path / "p.json"))
    assert code == 0 and rep["algorithm"] == "path-ef11"


def test_solve_interval_files(capsys, tmp_path):
    inst = tmp_path / "iv.json"
    assert run(capsys, "gen", "--family", "interval", "--m", "10", "--seed", "3", "--out", str(inst))[0] == 0
    ivs = tmp_path / "iv.intervals.json"
    assert ivs.exists()
    code, rep = run_json(capsys, "solve", "--instance", str(inst), "--intervals", str(ivs))
    assert code == 0 and rep["algorithm"] == "interval"


def test_check(capsys):
    code, out, _ = run(capsys, "check", "--instance", "ex1_path4", "--allocation", "({o2,o4},{o1,o3})",
                       "--properties", "ef1,maximal")
    assert code == 0 and "ef1: yes" in out
    code, rep = run_json(capsys, "check", "--instance", "ex4_path4", "--allocation", "({o1,o3},{o2,o4})",
                         "--properties", "ef1,po")
    assert code == 2
    assert rep["ef1"] == {"holds": False, "witness": [0, 1]}
    assert rep["po:feasible"]["holds"]


def test_check_unknown_property(capsys):
    code, _, err = run(capsys, "check", "--instance", "ex1_path4", "--allocation", "({o1},{o3})",
                       "--properties", "mms")
    assert code == 1 and "mms" in err


def test_enumerate(capsys):
    code, rep = run_json(capsys, "enumerate", "--instance", "ex1_path4", "--require", "efx,maximal")
    assert code == 2 and rep["verdict"] == "certified-none"
    assert rep["examined"] == 6
    code, rep = run_json(capsys, "enumerate", "--instance", "thm7_k3n(4)", "--require", "ef1,maximal")
    assert code == 2 and rep["verdict"] == "certified-none"
    code, rep = run_json(capsys, "enumerate", "--instance", "ex1_path4", "--require", "ef1,maximal")
    assert code == 0 and rep["witness"] == {"bundles": [[0, 2], [1, 3]]}
    code, rep = run_json(capsys, "enumerate", "--instance", "ex1_path4", "--require", "ef1,maximal", "--count")
    assert rep["count"] == 6


def test_enumerate_budget(capsys):
    code, _, err = run(capsys, "enumerate", "--instance", "thm7_k3n(6)", "--require", "ef1,maximal",
                       "--budget", "1000")
    assert code == 3 and "inconclusive" in err


@pytest.mark.parametrize("graph,t,yes", [("2:0-1", 1, True), ("2:0-1", 2, False), ("3:0-1,1-2,0-2", 1, True)])
def test_reduce(capsys, tmp_path, graph, t, yes):
    code, rep = run_json(capsys, "reduce", "--counterexample", "prop3:2", "--is-graph", graph,
                         "--t", str(t), "--out", str(tmp_path), "--verify")
    assert code == 0
    assert rep["independent_set"] is yes and rep["agrees"]
    assert read_instance(tmp_path / "instance.json").num_items == rep["items"]
    art = json.loads((tmp_path / "artifacts.json").read_text())
    assert art["edge_counts"] == rep["edge_counts"]


def test_reduce_graph_file(capsys, tmp_path):
    gfile = tmp_path / "h.json"
    gfile.write_text(json.dumps({"num_vertices": 2, "edges": [[0, 1]]}))
    code, rep = run_json(capsys, "reduce", "--counterexample", "prop3:2", "--is-graph", str(gfile),
                         "--t", "1", "--out", str(tmp_path / "o"))
    assert code == 0 and rep["edge_counts"] == {"i": 1, "ii": 2, "iii": 4, "iv": 16}


def test_examples(capsys, tmp_path):
    code, out, _ = run(capsys, "examples", "list")
    assert code == 0 and len(out.split()) == 10
    target = tmp_path / "ex2.json"
    assert run(capsys, "examples", "emit", "ex2_cycle6", "--out", str(target))[0] == 0
    inst = read_instance(target)
    assert [inst.valuations.value(0, [o]) for o in range(6)] == [1, 2, 1, 2, 1, 2]


def test_gen_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for f in (a, b):
        assert run(capsys, "gen", "--family", "path", "--m", "12", "--seed", "7", "--out", str(f))[0] == 0
    assert a.read_text() == b.read_text()


def test_usage_and_io_errors(capsys):
    assert run(capsys, "solve")[0] == 1
    assert run(capsys, "solve", "--instance", "/nonexistent/file.json")[0] == 1
    assert run(capsys, "bogus")[0] == 1
    assert run(capsys, "examples", "emit")[0] == 1


def test_quiet_after_subcommand(capsys):
    code, out, _ = run(capsys, "solve", "--instance", "ex1_path4", "--quiet")
    assert code == 0 and json.loads(out)["algorithm"]


def test_parse_helpers():
    inst = builtin("ex1_path4")
    assert parse_allocation_text("({o2, o4}, {})", inst) == Allocation([{1, 3}, set()])
    with pytest.raises(ValidationError):
        parse_allocation_text("({o9},{})", inst)
    with pytest.raises(ValidationError):
        parse_allocation_text("nothing", inst)
    g = parse_is_graph("4:0-1,2-3")
    assert g.num_items == 4 and g.edges == {(0, 1), (2, 3)}
    assert parse_is_graph("3").edges == frozenset()
    with pytest.raises(ValidationError):
        parse_is_graph("3:0+1")
