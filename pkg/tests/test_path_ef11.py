import json
import random

import pytest

from conflictfair import checkers, kernels
from conflictfair.core import AdditiveValuation, Allocation, ConflictGraph, Instance, UniformValuation
from conflictfair.errors import UnsupportedValuation, ValidationError, WrongSolver
from conflictfair.instances import generate
from conflictfair.path_ef11 import (
    GADGET_SIZE,
    allocation_from_coloring,
    build_clique_cycle,
    check_clique_cycle,
    color_clique_cycle,
    is_proper_coloring,
    solve_path_ef11,
)

# path as drawn, left to right, by preference label; values make label order the rank order
FIG4_LABELS = [7, 10, 9, 6, 5, 2, 1, 8, 4, 3]
# colours of o1..o12 in the pictured 3-colouring
FIG5_COLOURS = [1, 2, 3, 1, 3, 2, 1, 2, 3, 2, 1, 3]


def fig4_instance():
    vals = [11 - lab for lab in FIG4_LABELS]
    return Instance(ConflictGraph.path(10), AdditiveValuation.identical_values(vals, 3))


def label(h, v):
    return h.rank[v] + 1


def test_fig4_structure():
    inst = fig4_instance()
    h = build_clique_cycle(inst)
    check_clique_cycle(h, inst.graph)
    assert h.dummies == [10, 11]
    item_cliques = [sorted(label(h, v) for v in c) for c in h.cliques if max(c) < h.num_items]
    assert item_cliques == [[1, 2, 3], [4, 5, 6], [7, 8, 9], [10, 11, 12]]
    special = sorted(sorted((label(h, a), label(h, b))) for a, b, _ in h.gadgets)
    assert special == [[1, 2], [5, 6], [11, 12]]
    assert h.num_vertices == 12 + 3 * GADGET_SIZE
    # closing edge joins the extremes o7 and o12 directly
    assert (0, 11) in h.cycle_edges()


def test_fig5_colouring_extends():
    inst = fig4_instance()
    h = build_clique_cycle(inst)
    pinned = [-1] * h.num_vertices
    for v in range(h.num_items):
        pinned[v] = FIG5_COLOURS[label(h, v) - 1] - 1
    nbrs = [sorted(s) for s in h.neighbours()]
    col = kernels.color_graph(h.num_vertices, nbrs, 3, h.cycle, pinned)
    assert col is not None and is_proper_coloring(h, col)
    alloc = allocation_from_coloring(inst, h, col)
    by_label = [sorted(label(h, v) for v in b) for b in alloc]
    assert by_label == [[1, 4, 7], [2, 6, 8, 10], [3, 5, 9]]
    assert checkers.is_ef11(inst, alloc) and checkers.is_complete(inst, alloc)


def test_fig4_solver():
    inst = fig4_instance()
    alloc = solve_path_ef11(inst)
    assert checkers.is_ef1(inst, alloc) and checkers.is_complete(inst, alloc)


def test_m_equals_n_all_edges_gadgets():
    inst = Instance(ConflictGraph.path(3), AdditiveValuation.identical_values([3, 2, 1], 3))
    h = build_clique_cycle(inst)
    check_clique_cycle(h, inst.graph)
    assert len(h.gadgets) == 3
    assert h.cliques[0] == (0, 1, 2)
    assert checkers.is_complete(inst, solve_path_ef11(inst))


def test_uniform_nine_items():
    inst = Instance(ConflictGraph.path(9), UniformValuation(3, 9))
    alloc = solve_path_ef11(inst)
    assert [len(b) for b in alloc] == [3, 3, 3]
    assert checkers.is_envy_free(inst, alloc)


def test_rejects_improper_colouring():
    inst = fig4_instance()
    h = build_clique_cycle(inst)
    with pytest.raises(ValidationError):
        allocation_from_coloring(inst, h, [0] * h.num_vertices)


def test_errors():
    with pytest.raises(WrongSolver):
        build_clique_cycle(Instance(ConflictGraph.cycle(6), UniformValuation(3, 6)))
    with pytest.raises(WrongSolver):
        build_clique_cycle(Instance(ConflictGraph.path(4), UniformValuation(2, 4)))
    nonident = AdditiveValuation(((1, 2, 3), (3, 2, 1), (1, 1, 1)))
    with pytest.raises(UnsupportedValuation):
        build_clique_cycle(Instance(ConflictGraph.path(3), nonident))


def test_json_dump():
    doc = json.loads(build_clique_cycle(fig4_instance()).dumps())
    kinds = [v["kind"] for v in doc["vertices"]]
    assert kinds.count("item") == 10 and kinds.count("dummy") == 2 and kinds.count("gadget") == 27
    assert len(doc["cycle"]) == 39


def test_empty_and_tiny_paths():
    inst = Instance(ConflictGraph(0, []), UniformValuation(3, 0))
    assert solve_path_ef11(inst) == Allocation([set(), set(), set()])
    one = Instance(ConflictGraph(1, []), AdditiveValuation.identical_values([5], 4))
    alloc = solve_path_ef11(one)
    assert alloc.allocated() == {0}


def test_random_paths_invariants():
    rng = random.Random(12)
    for trial in range(120):
        m, n = rng.randint(1, 24), rng.randint(3, 5)
        signed = trial % 3
        lo, hi = [(0, 9), (-9, 0), (-9, 9)][signed]
        vals = [rng.randint(lo, hi) for _ in range(m)]
        order = rng.sample(range(m), m)
        g = ConflictGraph(m, [(order[k], order[k + 1]) for k in range(m - 1)])
        inst = Instance(g, AdditiveValuation.identical_values(vals, n))
        h = build_clique_cycle(inst)
        check_clique_cycle(h, g)
        col = color_clique_cycle(h)
        alloc = allocation_from_coloring(inst, h, col)
        assert checkers.is_complete(inst, alloc) and checkers.is_ef11(inst, alloc)
        if signed != 2:
            assert checkers.is_ef1(inst, alloc)
        groups = h.groups()
        allv = vals + [0] * len(h.dummies)
        for grp in groups:
            assert sorted(col[v] for v in grp) == list(range(len(grp)))
        for g1, g2 in zip(groups, groups[1:]):
            assert min(allv[v] for v in g1) >= max(allv[v] for v in g2)
        if signed == 0:
            for c in range(n):
                assert sum(1 for v in h.dummies if col[v] == c) <= 1


def test_dropping_dummies_keeps_ef11():
    for seed in range(30):
        inst = generate("path", {"m": 10}, seed, valuation_params={"lo": -5, "hi": 5}, num_agents=4)
        h = build_clique_cycle(inst)
        col = color_clique_cycle(h)
        padded = Instance(ConflictGraph.path(h.num_items),
                          AdditiveValuation.identical_values(
                              [inst.valuations.value(0, [v]) if v < 10 else 0 for v in h.path_order], 4))
        # same allocation viewed on the padded path, dummies included
        pos = {v: k for k, v in enumerate(h.path_order)}
        with_dummies = Allocation([{pos[v] for v in range(h.num_items) if col[v] == c} for c in range(4)])
        assert checkers.is_ef11(padded, with_dummies)
        assert checkers.is_ef11(inst, allocation_from_coloring(inst, h, col))
