import itertools
import random
from fractions import Fraction

import pytest

from conflictfair import checkers, oracle
from conflictfair.core import ConflictGraph, Monotonicity, RuleValuation
from conflictfair.errors import PreconditionError, ValidationError
from conflictfair.hardness import build_reduction, has_independent_set, verify_reduction
from conflictfair.instances import builtin

PROP3 = builtin("prop3_clique(2)")
EDGE = ConflictGraph(2, [(0, 1)])
TRIANGLE = ConflictGraph.complete(3)


def test_single_edge_t1():
    inst, art = build_reduction(PROP3, EDGE, 1)
    assert inst.num_items == art.num_items == 10
    assert art.gamma == 1 and art.lam == 1
    assert {k: len(v) for k, v in art.edges.items()} == {"i": 1, "ii": 2, "iii": 4, "iv": 16}
    assert verify_reduction(inst, True)
    assert not oracle.exists_allocation(inst, ["ef1", "maximal"], symmetric=True).certified_none


def test_single_edge_t2():
    inst, art = build_reduction(PROP3, EDGE, 2)
    assert art.lam == Fraction(1, 2)
    assert verify_reduction(inst, False)
    assert oracle.exists_allocation(inst, ["ef1", "maximal"], symmetric=True).certified_none


def test_triangle_t1():
    inst, _ = build_reduction(PROP3, TRIANGLE, 1)
    assert verify_reduction(inst, True)


def test_structure():
    inst, art = build_reduction(PROP3, TRIANGLE, 2)
    g = inst.graph
    for i in range(2):
        block = [art.x_item(i, w) for w in range(3)]
        inner = {(a - block[0], b - block[0]) for a, b in itertools.combinations(block, 2) if g.adjacent(a, b)}
        assert inner == set(TRIANGLE.edges)
        for w in range(3):
            assert g.adjacent(art.x_item(i, w), art.y_item(i, w))
    v = inst.valuations
    rng = random.Random(0)
    for _ in range(200):
        sub = [o for o in range(2) if rng.random() < 0.5]
        assert v.value(0, sub) == PROP3.valuations.value(0, sub)
    for i in range(2):
        for w in range(3):
            assert v.value(0, [art.y_item(i, w)]) == 0
            assert v.value(1, [art.x_item(i, w)]) == art.lam
    assert inst.item_labels()[2] == "x1_1"
    assert inst.item_labels()[-1] == "y2_3"


def test_rule_base_stays_compositional():
    thm6 = builtin("thm6_k33")
    inst, art = build_reduction(thm6, EDGE, 1, certify=False)
    assert isinstance(inst.valuations, RuleValuation)
    assert inst.valuations.monotone is Monotonicity.NONDECREASING
    assert inst.num_items == 7 + 2 * 3 * 2
    assert inst.valuations.value(0, [1, 6]) == 3
    assert inst.valuations.value(0, [1, 6, art.x_item(0, 0)]) == 3 + art.lam


def test_preconditions():
    with pytest.raises(ValidationError):
        build_reduction(PROP3, EDGE, 0)
    with pytest.raises(PreconditionError):
        build_reduction(builtin("ex1_path4"), EDGE, 1)


def test_has_independent_set():
    assert has_independent_set(EDGE, 1) and not has_independent_set(EDGE, 2)
    assert has_independent_set(ConflictGraph(3, []), 3)
    assert has_independent_set(TRIANGLE, 0)


def test_reduction_witness_is_checker_valid():
    inst, _ = build_reduction(PROP3, ConflictGraph.path(3), 2)
    res = oracle.exists_allocation(inst, ["ef1", "maximal"], symmetric=True)
    assert res.witness is not None
    assert checkers.is_ef1(inst, res.witness) and checkers.is_maximal(inst, res.witness)
