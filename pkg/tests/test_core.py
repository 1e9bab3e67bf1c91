from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conflictfair.core import (
    AdditiveValuation,
    Allocation,
    ConflictGraph,
    Instance,
    Monotonicity,
    TableValuation,
    UniformValuation,
    absolute_valuation,
    as_fraction,
    bundle_value,
    is_feasible,
    items_of,
    mask_of,
    negate_valuations,
    verify_monotone,
)
from conflictfair.errors import (
    IncompleteValuation,
    MalformedAllocation,
    UnsupportedValuation,
    ValidationError,
)
from conflictfair.instances import builtin

from conftest import labelled


def test_fraction_coercion():
    assert as_fraction("1/3") == Fraction(1, 3)
    assert as_fraction(2) == 2
    with pytest.raises(TypeError):
        as_fraction(0.5)


def test_mask_roundtrip():
    assert items_of(mask_of([0, 3, 5])) == frozenset({0, 3, 5})
    assert mask_of([]) == 0


def test_graph_rejects_self_loop():
    with pytest.raises(ValidationError):
        ConflictGraph(2, [(0, 0)])


def test_graph_helpers():
    g = ConflictGraph.path(4)
    assert g.adjacent(0, 1) and not g.adjacent(0, 2)
    assert g.neighbors(1) == frozenset({0, 2})
    assert g.is_tree() and g.is_connected()
    assert g.path_order() in ([0, 1, 2, 3], [3, 2, 1, 0])
    assert g.is_maximal_independent({0, 2}) and not g.is_maximal_independent({0})
    assert ConflictGraph.cycle(5).two_coloring() is None
    assert ConflictGraph.cycle(4).path_order() is None
    assert len(ConflictGraph.complete(4).edges) == 6


def test_is_feasible_examples():
    inst = builtin("ex1_path4")
    assert is_feasible(inst, labelled({2, 4}, {1, 3}))
    assert not is_feasible(inst, labelled({1, 2}, set()))
    assert not is_feasible(inst, labelled({1}, {1}))


def test_is_feasible_out_of_range():
    inst = builtin("ex1_path4")
    with pytest.raises(MalformedAllocation):
        is_feasible(inst, Allocation([{7}, set()]))


def test_instance_size_mismatch():
    with pytest.raises(ValidationError):
        Instance(ConflictGraph.path(3), AdditiveValuation.identical_values([1, 2], 2))


def test_bundle_values():
    inst = builtin("ex1_path4")
    assert bundle_value(inst, 0, {0, 3}) == 5
    assert bundle_value(inst, 1, set()) == 0
    thm6 = builtin("thm6_k33")
    for agent in range(3):
        assert bundle_value(thm6, agent, {1, 6}) == 3
        assert bundle_value(thm6, agent, set()) == 0


def test_table_without_default():
    tv = TableValuation(1, 2, {frozenset(): 0, frozenset({0}): 1})
    assert tv.value(0, [0]) == 1
    with pytest.raises(IncompleteValuation):
        tv.value(0, [1])
    with_default = TableValuation(1, 2, {frozenset({0}): 1}, default=5)
    assert with_default.value(0, [0, 1]) == 5


def test_table_size_cap():
    with pytest.raises(ValidationError):
        TableValuation(1, 25, {})


def test_negate():
    inst = builtin("ex1_path4")
    neg = negate_valuations(inst)
    assert [neg.valuations.value(0, [o]) for o in range(4)] == [-1, -1, -1, -4]
    assert negate_valuations(neg).valuations == inst.valuations
    assert neg.graph == inst.graph
    chores = negate_valuations(builtin("ex3_path5_chores"))
    assert [chores.valuations.value(0, [o]) for o in range(5)] == [2, 10, 1, 10, 2]


def test_absolute_valuation():
    chores = Instance(ConflictGraph.path(2), AdditiveValuation.identical_values([-2, -3], 2))
    ab = absolute_valuation(chores)
    assert ab.valuations.values[0] == (2, 3)
    assert ab.valuations.monotone is Monotonicity.NONDECREASING
    goods = builtin("ex1_path4")
    assert absolute_valuation(goods).valuations.values == goods.valuations.values
    ex3 = absolute_valuation(builtin("ex3_path5_chores"))
    assert ex3.valuations.values[0] == (2, 10, 1, 10, 2)
    with pytest.raises(UnsupportedValuation):
        absolute_valuation(builtin("nonmono_path2"))


def test_declared_monotonicity():
    assert builtin("ex1_path4").valuations.monotone is Monotonicity.NONDECREASING
    assert builtin("ex3_path5_chores").valuations.monotone is Monotonicity.NONINCREASING
    assert builtin("nonmono_path2").valuations.monotone is Monotonicity.NONE
    assert verify_monotone(builtin("thm6_k33").valuations, samples=200)


def test_verify_monotone_catches_false_claim():
    bad = TableValuation(1, 2, {frozenset({0}): 2, frozenset({0, 1}): 1}, default=0,
                         monotone=Monotonicity.NONDECREASING)
    assert not verify_monotone(bad, samples=500)


def test_allocation_helpers():
    a = labelled({2, 4}, {1, 3})
    assert a.reversed() == labelled({1, 3}, {2, 4})
    assert a.allocated() == frozenset(range(4))
    assert Allocation.from_masks(a.masks()) == a
    assert a.pretty(builtin("ex1_path4")) == "({o2,o4}, {o1,o3})"


values = st.lists(st.integers(-9, 9), min_size=1, max_size=8)


@settings(max_examples=100, deadline=None)
@given(values, st.data())
def test_additive_marginals(vals, data):
    prof = AdditiveValuation.identical_values(vals, 2)
    m = len(vals)
    s = data.draw(st.sets(st.integers(0, m - 1)))
    o = data.draw(st.integers(0, m - 1).filter(lambda x: x not in s)) if len(s) < m else None
    if o is None:
        return
    assert prof.value(0, s | {o}) - prof.value(0, s) == prof.value(0, {o})
    assert prof.negated().value(1, s) == -prof.value(1, s)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 10), st.data())
def test_uniform_counts(m, data):
    s = data.draw(st.sets(st.integers(0, m - 1)))
    assert UniformValuation(3, m).value(2, s) == len(s)
