"""Two-agent solvers built on the order-adjacent allocation sequence.

The core routine is :func:`build_sequence`: from a maximal independent set
``S`` it produces allocations ``A_0 .. A_m`` that are all maximal and
pairwise order-adjacent, with ``A_0 = (S, X_minconf)`` and
``A_m = (X_maxconf, S)``.  Whenever ``v(S)`` is at least the value of both
``X`` sets, the envy direction flips somewhere along the chain and one of
the two allocations around the flip is EF1.  The solvers differ only in how
they find a suitable ``S``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from . import checkers
from .core import (
    AdditiveValuation,
    Allocation,
    ConflictGraph,
    Instance,
    Monotonicity,
    UniformValuation,
    ValuationProfile,
    absolute_valuation,
    iter_bits,
    mask_of,
)
from .errors import PreconditionError, UnsupportedValuation, WrongSolver


@dataclass(frozen=True)
class ConfBounds:
    """Lowest and highest position (in the item order) of an ``S``-neighbour."""

    min_conf: dict
    max_conf: dict


@dataclass(frozen=True)
class AllocationSequence:
    """Chain of two-agent allocations given as ``(mask_1, mask_2)`` pairs.

    ``origins[k]`` says which construction produced element ``k``: ``alg1``
    for the core sequence, ``exchange-prefix`` / ``exchange-suffix`` for the
    interpolations the interval solver adds around it.
    """

    masks: tuple[tuple[int, int], ...]
    origins: tuple[str, ...]
    s: int = 0
    x_min: int = 0
    x_max: int = 0
    bounds: ConfBounds | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.masks)

    @property
    def allocations(self) -> list[Allocation]:
        return [Allocation.from_masks(p) for p in self.masks]


@dataclass(frozen=True)
class ImprovingSet:
    """An independent set worth strictly more than the current ``S``."""

    mask: int

    @property
    def items(self) -> frozenset[int]:
        return Allocation.from_masks([self.mask])[0]


# ---------------------------------------------------------------------------
# Algorithm 1
# ---------------------------------------------------------------------------


def _positions(m: int, order: Sequence[int] | None) -> list[int]:
    order = list(range(m)) if order is None else list(order)
    if sorted(order) != list(range(m)):
        raise PreconditionError("item order must be a permutation of all items")
    pos = [0] * m
    for p, item in enumerate(order, start=1):
        pos[item] = p
    return pos


def conf_bounds(graph: ConflictGraph, s_mask: int, pos: Sequence[int]) -> ConfBounds:
    lo, hi = {}, {}
    for o in range(graph.num_items):
        if s_mask >> o & 1:
            continue
        ps = [pos[w] for w in iter_bits(graph.adjacency[o] & s_mask)]
        if not ps:
            raise PreconditionError(f"S is not maximal: item {o} has no neighbour in S")
        lo[o], hi[o] = min(ps), max(ps)
    return ConfBounds(lo, hi)


def _greedy_mis(graph: ConflictGraph, candidates: Sequence[int]) -> int:
    chosen = 0
    adj = graph.adjacency
    for o in candidates:
        if not adj[o] & chosen:
            chosen |= 1 << o
    return chosen


def build_sequence(graph: ConflictGraph, s: Sequence[int] | frozenset[int],
                   order: Sequence[int] | None = None, validate: bool = True,
                   min_tiebreak: Sequence[int] | None = None) -> AllocationSequence:
    """Algorithm 1: ``m + 1`` maximal, consecutively order-adjacent allocations.

    ``order`` relabels the items ``1..m`` for the prefixes ``[o]``; it
    defaults to index order.  Ties in the greedy passes go to the item that
    comes first in ``order``; ``min_tiebreak`` optionally replaces that
    rank for the ``X_min`` pass only.  ``validate=False`` skips the independence
    check on ``S`` (only useful to replay hand-drawn traces); every item
    outside ``S`` still needs a neighbour in ``S``.
    """
    m = graph.num_items
    s_mask = mask_of(s)
    if validate and not graph.is_independent_mask(s_mask):
        raise PreconditionError("S is not independent")
    pos = _positions(m, order)
    bounds = conf_bounds(graph, s_mask, pos)
    rest = list(bounds.max_conf)
    x_max = _greedy_mis(graph, sorted(rest, key=lambda o: (bounds.max_conf[o], pos[o])))
    rank = pos if min_tiebreak is None else min_tiebreak
    x_min = _greedy_mis(graph, sorted(rest, key=lambda o: (-bounds.min_conf[o], rank[o])))

    by_pos = [0] * (m + 1)
    for item in range(m):
        by_pos[pos[item]] = item
    # incremental form of Line 3: step o moves item o of S to side 2, adds to
    # side 1 the X_max items with max_conf == o and drops from side 2 the
    # X_min items with min_conf == o
    gain1 = [0] * (m + 1)
    lose2 = [0] * (m + 1)
    for o in iter_bits(x_max):
        gain1[bounds.max_conf[o]] |= 1 << o
    for o in iter_bits(x_min):
        lose2[bounds.min_conf[o]] |= 1 << o
    a1, a2 = s_mask, x_min
    seq = [(a1, a2)]
    for p in range(1, m + 1):
        bit = 1 << by_pos[p]
        if s_mask & bit:
            a1 &= ~bit
            a2 |= bit
        a1 |= gain1[p]
        a2 &= ~lose2[p]
        seq.append((a1, a2))
    return AllocationSequence(tuple(seq), ("alg1",) * len(seq), s_mask, x_min, x_max, bounds)


def _ef1_identical(val: ValuationProfile, pair) -> bool:
    return checkers.ef1_mask(val, pair) is None


def scan_chain(chain: Sequence[tuple[int, int]], val: ValuationProfile) -> int:
    """Index of an EF1 member around the first envy flip of ``chain``.

    Needs ``v(first_1) >= v(first_2)`` and ``v(last_2) >= v(last_1)``; the
    first ``k`` with ``v(A_{k-1,1}) >= v(A_{k-1,2})`` and
    ``v(A_{k,2}) >= v(A_{k,1})`` is located, and whichever of ``A_{k-1}``,
    ``A_k`` is EF1 is returned (``A_{k-1}`` preferred).
    """
    v = val.value_mask
    if len(chain) == 1:
        if _ef1_identical(val, chain[0]):
            return 0
        raise PreconditionError("single-element chain is not EF1")
    if v(0, chain[0][0]) < v(0, chain[0][1]) or v(0, chain[-1][1]) < v(0, chain[-1][0]):
        raise PreconditionError("chain endpoints do not bracket an envy flip")
    for k in range(1, len(chain)):
        prev, cur = chain[k - 1], chain[k]
        if v(0, prev[0]) >= v(0, prev[1]) and v(0, cur[1]) >= v(0, cur[0]):
            if _ef1_identical(val, prev):
                return k - 1
            if _ef1_identical(val, cur):
                return k
            raise AssertionError("order-adjacent flip pair without an EF1 member")
    raise AssertionError("no envy flip located")


def find_ef1_in_sequence(seq: AllocationSequence, val: ValuationProfile):
    """EF1 member of the sequence, or the ``X`` set that beats ``S``.

    Returns an :class:`Allocation` when ``v(S)`` dominates both ``X`` sets,
    otherwise an :class:`ImprovingSet` (the more valuable ``X``; ``X_maxconf``
    on ties).
    """
    v = val.value_mask
    vs, vmin, vmax = v(0, seq.s), v(0, seq.x_min), v(0, seq.x_max)
    if vs >= vmin and vs >= vmax:
        return Allocation.from_masks(seq.masks[scan_chain(seq.masks, val)])
    return ImprovingSet(seq.x_max if vmax >= vmin else seq.x_min)


def _require_identical_goods(val: ValuationProfile) -> None:
    if not val.identical:
        raise UnsupportedValuation("this routine needs identical valuations")
    if val.monotone is not Monotonicity.NONDECREASING:
        raise UnsupportedValuation("this routine needs a non-decreasing valuation")


def improvement_loop(graph: ConflictGraph, val: ValuationProfile, start: Sequence[int] | None = None,
                     order: Sequence[int] | None = None,
                     scan_all: bool = False) -> tuple[Allocation, int]:
    """Driver loop; returns the EF1 allocation and the number of sequences built.

    With ``scan_all`` every sequence is first searched for any EF1 member
    before falling back to the improving set, as in the additive analysis.
    """
    _require_identical_goods(val)
    if start is not None and not graph.is_independent(start):
        raise PreconditionError("start set is not independent")
    s = graph.greedy_extend(start or ())
    iterations = 0
    last_value = None
    while True:
        iterations += 1
        seq = build_sequence(graph, s, order)
        if scan_all:
            for pair in seq.masks:
                if _ef1_identical(val, pair):
                    return Allocation.from_masks(pair), iterations
        res = find_ef1_in_sequence(seq, val)
        if isinstance(res, Allocation):
            return res, iterations
        cur = val.value_mask(0, seq.s)
        if last_value is not None and cur <= last_value:
            raise AssertionError("improvement loop failed to increase v(S)")
        last_value = cur
        s = graph.greedy_extend(res.items)


def solve_identical_monotone(graph: ConflictGraph, val: ValuationProfile,
                             order: Sequence[int] | None = None) -> Allocation:
    """Maximal EF1 allocation for two agents sharing a non-decreasing ``val``."""
    return improvement_loop(graph, val, order=order)[0]


# ---------------------------------------------------------------------------
# Instance-level solvers
# ---------------------------------------------------------------------------


def _two_monotone(instance: Instance) -> None:
    if instance.num_agents != 2:
        raise WrongSolver(f"two-agent solver applied to {instance.num_agents} agents")
    if instance.valuations.monotone is Monotonicity.NONE:
        raise UnsupportedValuation(
            "valuations are not monotone; a maximal EF1 allocation may not exist "
            "(one good worth +1 and one chore worth -1 on a 2-path has none)")


def cut_and_choose(instance: Instance, allocation: Allocation) -> Allocation:
    """Orient an allocation that is EF1 for agent 1 so both agents accept it."""
    if checkers.is_ef1(instance, allocation):
        return allocation
    rev = allocation.reversed()
    if checkers.is_ef1(instance, rev):
        return rev
    raise AssertionError("neither orientation is EF1")


def solve_two_agents(instance: Instance) -> Allocation:
    """Maximal EF1 allocation for two agents with monotone valuations."""
    _two_monotone(instance)
    ident = absolute_valuation(instance)
    alloc = solve_identical_monotone(ident.graph, ident.valuations)
    return cut_and_choose(instance, alloc)


def solve_bipartite(instance: Instance) -> Allocation:
    """Polynomial-time variant for bipartite conflict graphs (single pass)."""
    _two_monotone(instance)
    coloring = instance.graph.two_coloring()
    if coloring is None:
        raise WrongSolver("conflict graph is not bipartite")
    g = instance.graph
    ident = absolute_valuation(instance)
    val = ident.valuations
    isolated = mask_of(o for o in range(g.num_items) if not g.adjacency[o])
    left = mask_of(o for o in range(g.num_items) if coloring[o] == 0) | isolated
    right = mask_of(o for o in range(g.num_items) if coloring[o] == 1)
    # isolated vertices belong to whichever side is used as S
    if val.value_mask(0, right | isolated) > val.value_mask(0, left):
        s, other = right | isolated, left & ~isolated
    else:
        s, other = left, right
    seq = build_sequence(g, Allocation.from_masks([s])[0])
    v = val.value_mask
    assert max(v(0, seq.x_min), v(0, seq.x_max)) <= v(0, other) <= v(0, s)
    res = find_ef1_in_sequence(seq, val)
    assert isinstance(res, Allocation)
    return cut_and_choose(instance, res)


def additive_start(graph: ConflictGraph, val: ValuationProfile) -> frozenset[int]:
    """Greedy maximal independent set containing a highest-valued item."""
    m = graph.num_items
    if m == 0:
        return frozenset()
    best = max(range(m), key=lambda o: (val.value_mask(0, 1 << o), -o))
    return graph.greedy_extend([best])


def solve_additive_counted(instance: Instance) -> tuple[Allocation, int]:
    _two_monotone(instance)
    if not instance.valuations.is_additive():
        raise WrongSolver("additive solver needs additive valuations")
    ident = absolute_valuation(instance)
    val = ident.valuations
    if isinstance(val, UniformValuation):
        val = val.as_additive()
    g = ident.graph
    alloc, iters = improvement_loop(g, val, start=additive_start(g, val), scan_all=True)
    return cut_and_choose(instance, alloc), iters


def solve_additive(instance: Instance) -> Allocation:
    """Two agents, additive monotone valuations; O(m log m) improvement rounds."""
    return solve_additive_counted(instance)[0]


def additive_iteration_bound(m: int) -> int:
    return math.ceil(m * math.log(m)) + m if m > 1 else m + 1


# ---------------------------------------------------------------------------
# Baselines that fail EF1 under conflicts
# ---------------------------------------------------------------------------


def _require_additive(instance: Instance) -> AdditiveValuation:
    val = instance.valuations
    if isinstance(val, UniformValuation):
        return val.as_additive()
    if not isinstance(val, AdditiveValuation):
        raise UnsupportedValuation("baseline algorithms need additive valuations")
    return val


def _favourite(val: AdditiveValuation, graph: ConflictGraph, agent: int, bundle: int, free: int):
    best = None
    row = val.values[agent]
    for o in iter_bits(free):
        if graph.adjacency[o] & bundle or row[o] < 0:
            continue
        if best is None or row[o] > row[best]:
            best = o
    return best


def _top_up(graph: ConflictGraph, bundles: list[int], free: int) -> int:
    for o in range(graph.num_items):
        if not free >> o & 1:
            continue
        for a, b in enumerate(bundles):
            if not graph.adjacency[o] & b:
                bundles[a] |= 1 << o
                free &= ~(1 << o)
                break
    return free


def round_robin_constrained(instance: Instance, agent_order: Sequence[int] | None = None,
                            top_up: bool = False) -> Allocation:
    """Round robin where each pick must keep the picker's bundle independent.

    An agent with no feasible non-negative item passes its turn; the process
    stops after a full round of passes.  ``top_up`` finally adds leftover
    items greedily to make the result maximal.
    """
    val = _require_additive(instance)
    n = instance.num_agents
    order = list(range(n)) if agent_order is None else list(agent_order)
    if sorted(order) != list(range(n)):
        raise PreconditionError("agent order must be a permutation of the agents")
    g = instance.graph
    bundles = [0] * n
    free = (1 << g.num_items) - 1
    idle = 0
    while idle < n:
        for a in order:
            o = _favourite(val, g, a, bundles[a], free)
            if o is None:
                idle += 1
                if idle >= n:
                    break
                continue
            idle = 0
            bundles[a] |= 1 << o
            free &= ~(1 << o)
    if top_up:
        _top_up(g, bundles, free)
    return Allocation.from_masks(bundles)


def _envies(val, bundles, i, j) -> bool:
    return val.value_mask(i, bundles[i]) < val.value_mask(i, bundles[j])


def envy_cycle_constrained(instance: Instance, max_rotations: int | None = None) -> Allocation:
    """Envy-cycle elimination restricted to feasible picks.

    A source of the envy graph (an agent nobody envies) with a feasible item
    picks its favourite one.  Sources without any feasible item are skipped;
    if no source can pick, the lowest-indexed agent that can pick does.  If
    no source exists at all, an envy cycle is rotated.
    """
    val = _require_additive(instance)
    n = instance.num_agents
    g = instance.graph
    identical = val.identical
    bundles = [0] * n
    free = (1 << g.num_items) - 1
    rotations = 0
    max_rotations = max_rotations if max_rotations is not None else 10 * n * max(1, g.num_items)
    while True:
        picks = {a: _favourite(val, g, a, bundles[a], free) for a in range(n)}
        able = [a for a in range(n) if picks[a] is not None]
        if not able:
            break
        envied = {j for i in range(n) for j in range(n) if i != j and _envies(val, bundles, i, j)}
        sources = [a for a in range(n) if a not in envied]
        if not sources:
            assert not identical, "envy cycle under identical valuations"
            rotations += 1
            if rotations > max_rotations:
                raise AssertionError("envy-cycle rotation did not terminate")
            _rotate_cycle(val, bundles)
            continue
        chooser = next((a for a in sources if picks[a] is not None), able[0])
        o = picks[chooser]
        bundles[chooser] |= 1 << o
        free &= ~(1 << o)
    return Allocation.from_masks(bundles)


def _rotate_cycle(val, bundles) -> None:
    n = len(bundles)
    # every agent is envied: walk backwards along envy edges until a repeat
    envier = {}
    for j in range(n):
        for i in range(n):
            if i != j and _envies(val, bundles, i, j):
                envier[j] = i
                break
    seen = []
    cur = 0
    while cur not in seen:
        seen.append(cur)
        cur = envier[cur]
    cycle = seen[seen.index(cur):]
    # cycle[k+1] envies cycle[k]; give it that bundle
    old = {a: bundles[a] for a in cycle}
    for k, a in enumerate(cycle):
        bundles[cycle[(k + 1) % len(cycle)]] = old[a]
