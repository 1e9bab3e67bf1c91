import random

import pytest

from conflictfair import checkers, oracle
from conflictfair.core import AdditiveValuation, Allocation, ConflictGraph, Instance, UniformValuation
from conflictfair.errors import PreconditionError, UnsupportedValuation, ValidationError, WrongSolver
from conflictfair.instances import generate
from conflictfair.tree_equitable import (
    PartialColoring,
    allocation_from_equitable,
    equitable_color_tree,
    solve_tree_uniform,
)

STAR = ConflictGraph(4, [(0, 1), (0, 2), (0, 3)])


def test_single_vertex():
    col = equitable_color_tree(ConflictGraph(1, []), 2)
    assert col.classes == (frozenset({0}), frozenset())


def test_star():
    col = equitable_color_tree(STAR, 2, debug=True)
    assert col.classes == (frozenset({1, 3}), frozenset({2}))
    assert col.color_of(0) is None
    inst = Instance(STAR, UniformValuation(2, 4))
    alloc = allocation_from_equitable(inst, col)
    assert checkers.is_ef1(inst, alloc) and checkers.is_maximal(inst, alloc)


def test_path4():
    p4 = ConflictGraph.path(4)
    assert equitable_color_tree(p4, 2, debug=True).classes == (frozenset({1, 3}), frozenset({0, 2}))
    single = equitable_color_tree(p4, 1, debug=True)
    assert single.classes == (frozenset({1, 3}),)
    assert p4.is_maximal_independent(single.classes[0])


def test_violations_named():
    p4 = ConflictGraph.path(4)
    assert PartialColoring((frozenset({0, 1}), frozenset())).violations(p4) == [
        "independence", "maximality", "equitability"]
    assert PartialColoring((frozenset({0}), frozenset({0, 2}))).violations(p4)[0] == "overlap"
    assert PartialColoring((frozenset({0, 2}), frozenset({1, 3}))).violations(p4) == []


def test_rejects():
    with pytest.raises(WrongSolver):
        equitable_color_tree(ConflictGraph.cycle(4), 2)
    with pytest.raises(PreconditionError):
        equitable_color_tree(STAR, 0)
    inst = Instance(STAR, UniformValuation(2, 4))
    with pytest.raises(ValidationError):
        allocation_from_equitable(inst, PartialColoring((frozenset({0, 1}), frozenset())))
    with pytest.raises(ValidationError):
        allocation_from_equitable(inst, PartialColoring((frozenset({1}),)))
    with pytest.raises(UnsupportedValuation):
        solve_tree_uniform(Instance(STAR, AdditiveValuation.identical_values([1, 1, 1, 1], 2)))


def test_empty_tree():
    assert equitable_color_tree(ConflictGraph(0, []), 3).classes == (frozenset(),) * 3


def test_deep_path_no_recursion_limit():
    m = 5000
    col = equitable_color_tree(ConflictGraph.path(m), 3)
    assert col.violations(ConflictGraph.path(m)) == []


def random_tree(rng, m):
    return ConflictGraph(m, [(i, rng.randrange(i)) for i in range(1, m)])


def test_random_trees_all_roots():
    rng = random.Random(21)
    for _ in range(150):
        m, n = rng.randint(1, 25), rng.randint(1, 6)
        t = random_tree(rng, m)
        root = rng.randrange(m)
        col = equitable_color_tree(t, n, root, debug=True)
        assert col.violations(t) == []
        c = col.color_of(root)
        sizes = [len(s) for s in col.classes]
        assert c is None or sizes[c] == max(sizes)


def test_oracle_agrees_small():
    rng = random.Random(5)
    for _ in range(60):
        m, n = rng.randint(1, 8), rng.randint(2, 3)
        inst = Instance(random_tree(rng, m), UniformValuation(n, m))
        assert not oracle.exists_allocation(inst, ["ef1", "maximal"], symmetric=True).certified_none
        alloc = solve_tree_uniform(inst)
        assert alloc in set(oracle.enumerate_maximal(inst))


def test_generated_trees():
    for seed in range(40):
        inst = generate("tree", {"m": 30}, seed, valuation="uniform", num_agents=1 + seed % 6)
        alloc = solve_tree_uniform(inst)
        assert checkers.is_ef1(inst, alloc) and checkers.is_maximal(inst, alloc)
        assert isinstance(alloc, Allocation)
