"""Exact fairness and efficiency predicates.

Every predicate returns a :class:`CheckResult`, which is truthy iff the
property holds and otherwise carries a minimal witness:

* envy-based notions: ``(i, j)``, the first agent pair (0-based) for which
  the condition fails, agent ``i`` being the one who envies;
* maximality: ``(agent, item)``, an unallocated item the agent could take;
* completeness: the smallest unallocated item;
* Pareto optimality: an :class:`~conflictfair.core.Allocation` dominating
  the input.

The ``_mask`` helpers work on tuples of bundle bitmasks and skip all input
validation; the oracle calls them in its inner loop.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from . import kernels
from .core import (
    Allocation,
    ConflictGraph,
    Instance,
    ValuationProfile,
    iter_bits,
    require_feasible,
)
from .errors import BudgetExhausted, UnsupportedValuation, ValidationError

PO_UNIVERSES = ("feasible", "maximal", "complete")
DEFAULT_PO_NODES = 2_000_000


@dataclass(frozen=True)
class CheckResult:
    holds: bool
    witness: object = None

    def __bool__(self) -> bool:
        return self.holds


OK = CheckResult(True)


def _pairs(n):
    for i in range(n):
        for j in range(n):
            if i != j:
                yield i, j


def envy_free_mask(val: ValuationProfile, masks: Sequence[int]):
    for i, j in _pairs(len(masks)):
        if val.value_mask(i, masks[i]) < val.value_mask(i, masks[j]):
            return (i, j)
    return None


def ef1_pair(val: ValuationProfile, i: int, mi: int, mj: int) -> bool:
    vi = val.value_mask
    if vi(i, mi) >= vi(i, mj):
        return True
    for o in iter_bits(mj):
        if vi(i, mi) >= vi(i, mj & ~(1 << o)):
            return True
    for o in iter_bits(mi):
        if vi(i, mi & ~(1 << o)) >= vi(i, mj):
            return True
    return False


def ef1_mask(val: ValuationProfile, masks: Sequence[int]):
    for i, j in _pairs(len(masks)):
        if not ef1_pair(val, i, masks[i], masks[j]):
            return (i, j)
    return None


def efx_mask(val: ValuationProfile, masks: Sequence[int]):
    vi = val.value_mask
    for i, j in _pairs(len(masks)):
        mi, mj = masks[i], masks[j]
        own, other = vi(i, mi), vi(i, mj)
        for o in iter_bits(mj):
            rest = vi(i, mj & ~(1 << o))
            if rest < other and own < rest:
                return (i, j)
        for o in iter_bits(mi):
            rest = vi(i, mi & ~(1 << o))
            if rest > own and rest < other:
                return (i, j)
    return None


def ef11_mask(val: ValuationProfile, masks: Sequence[int]):
    vi = val.value_mask
    for i, j in _pairs(len(masks)):
        mi, mj = masks[i], masks[j]
        own_options = [vi(i, mi)] + [vi(i, mi & ~(1 << o)) for o in iter_bits(mi)]
        other_options = [vi(i, mj)] + [vi(i, mj & ~(1 << o)) for o in iter_bits(mj)]
        if max(own_options) < min(other_options):
            return (i, j)
    return None


def maximal_mask(graph: ConflictGraph, masks: Sequence[int]):
    allocated = 0
    for mk in masks:
        allocated |= mk
    adj = graph.adjacency
    for o in range(graph.num_items):
        if allocated >> o & 1:
            continue
        for a, mk in enumerate(masks):
            if not adj[o] & mk:
                return (a, o)
    return None


def complete_mask(num_items: int, masks: Sequence[int]):
    allocated = 0
    for mk in masks:
        allocated |= mk
    missing = ((1 << num_items) - 1) & ~allocated
    if missing:
        return (missing & -missing).bit_length() - 1
    return None


def _wrap(witness) -> CheckResult:
    return OK if witness is None else CheckResult(False, witness)


def is_envy_free(instance: Instance, allocation: Allocation) -> CheckResult:
    masks = require_feasible(instance, allocation)
    return _wrap(envy_free_mask(instance.valuations, masks))


def is_ef1(instance: Instance, allocation: Allocation) -> CheckResult:
    """Envy-free up to one item (mixed goods/chores form).

    For every ordered pair some ``S`` of size at most one inside
    ``A_i ∪ A_j`` makes ``v_i(A_i \\ S) >= v_i(A_j \\ S)``; removal from the
    envied bundle helps with goods, removal from one's own with chores.
    """
    masks = require_feasible(instance, allocation)
    return _wrap(ef1_mask(instance.valuations, masks))


def is_efx(instance: Instance, allocation: Allocation) -> CheckResult:
    masks = require_feasible(instance, allocation)
    return _wrap(efx_mask(instance.valuations, masks))


def is_ef11(instance: Instance, allocation: Allocation) -> CheckResult:
    masks = require_feasible(instance, allocation)
    return _wrap(ef11_mask(instance.valuations, masks))


def is_maximal(instance: Instance, allocation: Allocation) -> CheckResult:
    masks = require_feasible(instance, allocation)
    return _wrap(maximal_mask(instance.graph, masks))


def is_complete(instance: Instance, allocation: Allocation) -> CheckResult:
    masks = require_feasible(instance, allocation)
    return _wrap(complete_mask(instance.num_items, masks))


def _mode(universe: str) -> int:
    try:
        return {"feasible": kernels.FEASIBLE, "maximal": kernels.MAXIMAL,
                "complete": kernels.COMPLETE}[universe]
    except KeyError:
        raise ValidationError(f"unknown Pareto universe {universe!r}; use one of {PO_UNIVERSES}") from None


def is_pareto_optimal(instance: Instance, allocation: Allocation, universe: str = "feasible",
                      max_nodes: int = DEFAULT_PO_NODES) -> CheckResult:
    """No allocation in ``universe`` Pareto-dominates ``allocation``.

    Exhaustive; ``max_nodes`` caps the backtracking search and raises
    :class:`BudgetExhausted` when hit.
    """
    masks = require_feasible(instance, allocation)
    mode = _mode(universe)
    val = instance.valuations
    n = instance.num_agents
    base = [val.value_mask(a, masks[a]) for a in range(n)]
    stats = [0]
    try:
        for cand in kernels.enumerate_allocations(instance.num_items, n, instance.graph.adjacency,
                                                  mode, False, max_nodes, stats):
            strict = False
            for a in range(n):
                v = val.value_mask(a, cand[a])
                if v < base[a]:
                    break
                if v > base[a]:
                    strict = True
            else:
                if strict:
                    return CheckResult(False, Allocation.from_masks(cand))
    except kernels.NodeBudgetExceeded:
        raise BudgetExhausted(f"Pareto check exceeded {max_nodes} search nodes", stats[0]) from None
    return OK


def is_order_adjacent(first: Allocation, second: Allocation) -> bool:
    """``|A_1 \\ A'_1| <= 1`` and ``|A'_2 \\ A_2| <= 1``; deliberately asymmetric."""
    if len(first) != 2 or len(second) != 2:
        raise UnsupportedValuation("order-adjacency is defined for two-agent allocations")
    return len(first[0] - second[0]) <= 1 and len(second[1] - first[1]) <= 1


PROPERTY_NAMES = ("ef", "ef1", "efx", "ef11", "maximal", "complete",
                  "po:feasible", "po:maximal", "po:complete")


def check_properties(instance: Instance, allocation: Allocation, properties: Iterable[str],
                     max_nodes: int = DEFAULT_PO_NODES) -> dict[str, CheckResult]:
    """Evaluate named properties; names as in :data:`PROPERTY_NAMES`."""
    out = {}
    for name in properties:
        name = name.strip().lower()
        if name == "po":
            name = "po:feasible"
        if name not in PROPERTY_NAMES:
            raise ValidationError(f"unknown property {name!r}; known: {', '.join(PROPERTY_NAMES)}")
        if name.startswith("po:"):
            out[name] = is_pareto_optimal(instance, allocation, name[3:], max_nodes)
        else:
            out[name] = SIMPLE_CHECKS[name](instance, allocation)
    return out


SIMPLE_CHECKS = {
    "ef": is_envy_free,
    "ef1": is_ef1,
    "efx": is_efx,
    "ef11": is_ef11,
    "maximal": is_maximal,
    "complete": is_complete,
}
