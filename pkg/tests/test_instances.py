import json
from fractions import Fraction

import pytest

from conflictfair.core import Allocation, ConflictGraph, Monotonicity, verify_monotone
from conflictfair.errors import CatalogError, ParseError, ValidationError
from conflictfair.instances import (
    CATALOG,
    IntervalSpec,
    SeededRng,
    builtin,
    generate,
    generate_with_spec,
    instance_from_json,
    instance_to_json,
    interval_to_graph,
    load_instance,
    read_allocation,
    read_instance,
    read_intervals,
    write_allocation,
    write_instance,
    write_intervals,
)

ALL_BUILTINS = [c for c in CATALOG if c not in ("thm7_k3n", "prop3_clique")] + [
    "thm7_k3n(4)", "thm7_k3n(5)", "prop3_clique(2)", "prop3_clique(3)"]


def row(inst):
    return [inst.valuations.value(0, [o]) for o in range(inst.num_items)]


def test_ex1():
    inst = builtin("ex1_path4")
    assert inst.num_items == 4 and inst.num_agents == 2
    assert row(inst) == [1, 1, 1, 4]
    assert inst.graph == ConflictGraph.path(4)


def test_thm7():
    inst = builtin("thm7_k3n(4)")
    assert inst.num_items == 6 and inst.num_agents == 4
    assert inst.graph == ConflictGraph.complete_bipartite(range(3), range(3, 6), 6)
    assert row(inst) == [2, 2, 2, 3, 3, 3]
    assert builtin("thm7_k3n", 5) == builtin("thm7_k3n:5")


def test_prop3():
    inst = builtin("prop3_clique(3)")
    assert inst.graph == ConflictGraph.complete(3)
    assert row(inst) == [1, 1, -1]


def test_thm6_graph():
    inst = builtin("thm6_k33")
    assert inst.num_items == 7 and inst.num_agents == 3
    assert len(inst.graph.edges) == 11
    assert inst.graph.adjacent(0, 6) and inst.graph.adjacent(3, 6)
    assert verify_monotone(inst.valuations, samples=200)


@pytest.mark.parametrize("bad", ["nope", "thm7_k3n", "thm7_k3n(3)", "prop3_clique(1)", "ex1_path4(2)"])
def test_catalog_errors(bad):
    with pytest.raises(CatalogError):
        builtin(bad)


def test_generate_deterministic():
    a = generate("path", {"m": 5}, seed=1, valuation_params={"lo": 0, "hi": 9})
    b = generate("path", {"m": 5}, seed=1, valuation_params={"lo": 0, "hi": 9})
    assert a == b
    assert generate("gnp", {"m": 12, "p": 0.5}, seed=3) != generate("gnp", {"m": 12, "p": 0.5}, seed=4)


def test_generate_edgeless():
    assert generate("gnp", {"m": 6, "p": 0}, seed=0).graph.edges == frozenset()


def test_generate_interval_matches_spec():
    inst, spec = generate_with_spec("interval", {"m": 8}, seed=5)
    assert inst.graph == interval_to_graph(spec)
    assert spec.values is not None


def test_generate_tree_is_tree():
    for seed in range(20):
        assert generate("tree", {"m": 12}, seed, valuation="uniform").graph.is_tree()


def test_generate_concave_is_monotone():
    inst = generate("gnp", {"m": 8}, seed=2, valuation="monotone-concave")
    assert inst.valuations.monotone is Monotonicity.NONDECREASING
    assert verify_monotone(inst.valuations, samples=300)


def test_generate_rejects_unknown():
    with pytest.raises(ValidationError):
        generate("hypercube", {"m": 3}, seed=0)
    with pytest.raises(ValidationError):
        generate("path", {}, seed=0)


def test_rng_streams_are_stable():
    a = SeededRng(7, "x")
    b = SeededRng(7, "x")
    assert [a.randint(0, 100) for _ in range(5)] == [b.randint(0, 100) for _ in range(5)]
    assert sorted(SeededRng(1).shuffle(list(range(10)))) == list(range(10))


def test_interval_to_graph_examples():
    assert interval_to_graph(IntervalSpec([(0, 1), (2, 3)])).edges == frozenset()
    assert interval_to_graph(IntervalSpec([(0, 2), (1, 3)])).edges == {(0, 1)}
    assert interval_to_graph(IntervalSpec([(0, 5), (1, 2), (3, 4)])).edges == {(0, 1), (0, 2)}


def test_interval_touching_endpoints():
    with pytest.raises(ValidationError):
        IntervalSpec([(0, 1), (1, 2)])
    spec = IntervalSpec([(0, 1), (1, 2)], perturb=True)
    assert interval_to_graph(spec).edges == frozenset()
    # overlap survives perturbation
    spec = IntervalSpec([(0, 2), (2, 4), (1, 3)], perturb=True)
    assert interval_to_graph(spec).edges == {(0, 2), (1, 2)}


def test_interval_validation():
    with pytest.raises(ValidationError):
        IntervalSpec([(3, 1)])
    with pytest.raises(ValidationError):
        IntervalSpec([(0, 1)], values=[1, 2])


@pytest.mark.parametrize("name", ALL_BUILTINS)
def test_json_roundtrip(name, tmp_path):
    inst = builtin(name)
    path = tmp_path / "inst.json"
    write_instance(inst, path)
    back = read_instance(path)
    assert back.graph == inst.graph
    m = inst.num_items
    for a in range(inst.num_agents):
        for mask in range(1 << m):
            assert back.valuations.value_mask(a, mask) == inst.valuations.value_mask(a, mask)


def test_rational_strings_exact(tmp_path):
    from conflictfair.core import AdditiveValuation, Instance
    inst = Instance(ConflictGraph.path(2), AdditiveValuation.identical_values(["1/3", "-2/7"], 2))
    doc = instance_to_json(inst)
    assert doc["valuations"]["values"][0] == ["1/3", "-2/7"]
    back = instance_from_json(json.loads(json.dumps(doc)))
    assert back.valuations.value(0, [0, 1]) == Fraction(1, 3) - Fraction(2, 7)


def test_self_loop_is_parse_error():
    doc = instance_to_json(builtin("ex1_path4"))
    doc["edges"].append([2, 2])
    with pytest.raises(ParseError):
        instance_from_json(doc)


def test_parse_error_location():
    doc = instance_to_json(builtin("ex1_path4"))
    doc["valuations"]["values"][0][1] = "x"
    with pytest.raises(ParseError) as info:
        instance_from_json(doc)
    assert "/valuations" in str(info.value)


def test_allocation_and_interval_files(tmp_path):
    alloc = Allocation([{1, 3}, {0}])
    write_allocation(alloc, tmp_path / "a.json")
    assert read_allocation(tmp_path / "a.json") == alloc
    spec = IntervalSpec([(0, "3/2"), (1, 4)], values=[1, 2])
    write_intervals(spec, tmp_path / "i.json")
    assert read_intervals(tmp_path / "i.json") == spec


def test_load_instance_by_name_or_file(tmp_path):
    assert load_instance("ex4_path4") == builtin("ex4_path4")
    write_instance(builtin("ec5_path"), tmp_path / "x.json")
    assert load_instance(str(tmp_path / "x.json")).graph == ConflictGraph.path(5)
