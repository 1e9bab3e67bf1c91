"""Greedy (m, c)-interval scheduling and the two-agent interval-graph solver.

Intervals are half-open ``(l, r]``.  Routines that take a plain interval
list expect it sorted by strictly increasing finish time and refer to
intervals by their position in that list.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import checkers
from .core import Allocation, Instance, absolute_valuation, mask_of
from .errors import PreconditionError, WrongSolver
from .instances import IntervalSpec, interval_to_graph, intervals_intersect
from .two_agents import AllocationSequence, _two_monotone, build_sequence, cut_and_choose, scan_chain

NEG_INF = None  # finish time of an empty track


def _check_sorted(intervals: Sequence[tuple[Fraction, Fraction]]) -> None:
    for k, (lo, hi) in enumerate(intervals):
        if not lo < hi:
            raise PreconditionError(f"interval {k} is empty")
        if k and not intervals[k - 1][1] < hi:
            raise PreconditionError("intervals must be sorted by strictly increasing finish time")


def _covers(iv, point) -> bool:
    return iv[0] < point <= iv[1]


def greedy_schedule(intervals: Sequence[tuple[Fraction, Fraction]], c: int,
                    check_invariants: bool = False) -> tuple[frozenset[int], list[frozenset[int]]]:
    """Largest ``c``-feasible subset, split into ``c`` disjoint 1-feasible tracks.

    Interval ``i`` joins, among the tracks whose latest finish is at most
    ``l_i``, the one finishing latest (lowest track index on ties); it is
    skipped when no track qualifies.  ``check_invariants`` re-verifies the
    covering property of every track pair after each step.
    """
    if c < 1:
        raise PreconditionError("c must be positive")
    _check_sorted(intervals)
    tracks: list[list[int]] = [[] for _ in range(c)]
    finish: list[Fraction | None] = [NEG_INF] * c
    for i, (lo, hi) in enumerate(intervals):
        best = -1
        for j in range(c):
            fj = finish[j]
            if fj is None or fj <= lo:
                if best < 0 or _later(fj, finish[best]):
                    best = j
        if best >= 0:
            tracks[best].append(i)
            finish[best] = hi
        if check_invariants:
            _check_covering(intervals, tracks, finish)
    sets = [frozenset(t) for t in tracks]
    return frozenset().union(*sets), sets


def _later(a, b) -> bool:
    if a is None:
        return False
    return b is None or a > b


def _check_covering(intervals, tracks, finish) -> None:
    # a non-empty track's finish point lies in some interval of every track
    # finishing no earlier
    for j1, t1 in enumerate(tracks):
        if not t1:
            continue
        for j2, t2 in enumerate(tracks):
            if finish[j2] is not None and finish[j1] <= finish[j2]:
                if not any(_covers(intervals[i], finish[j1]) for i in t2):
                    raise AssertionError(f"covering invariant broken for tracks {j1}, {j2}")


def is_one_feasible(intervals, items) -> bool:
    items = list(items)
    return not any(intervals_intersect(intervals[a], intervals[b])
                   for k, a in enumerate(items) for b in items[k + 1:])


def is_c_feasible(intervals, items, c: int) -> bool:
    """Every point lies in at most ``c`` of the chosen intervals."""
    items = list(items)
    # depth is maximised just after some left endpoint
    for a in items:
        lo = intervals[a][0]
        depth = sum(1 for b in items if intervals[b][0] <= lo < intervals[b][1])
        if depth > c:
            return False
    return True


def exchange_sequence(greedy: Sequence[int], other: Sequence[int],
                      intervals: Sequence[tuple[Fraction, Fraction]] | None = None) -> list[frozenset[int]]:
    """Interpolants ``S''_0 = S' .. S''_{k'}`` swapping in greedy items one by one.

    ``S''_j = {i_1..i_j} ∪ {i'_{j+1}..i'_{k'}}`` with both inputs sorted by
    finish position.  When ``intervals`` is given, ``other`` is checked for
    1-feasibility and every interpolant is verified.
    """
    s = sorted(greedy)
    sp = sorted(other)
    if len(sp) > len(s):
        raise PreconditionError("the other set is larger than the greedy optimum")
    if intervals is not None and not is_one_feasible(intervals, sp):
        raise PreconditionError("the other set is not 1-feasible")
    out = [frozenset(s[:j] + sp[j:]) for j in range(len(sp) + 1)]
    if intervals is not None:
        for j, x in enumerate(out):
            if not is_one_feasible(intervals, x):
                raise AssertionError(f"exchange interpolant {j} is not 1-feasible")
    return out


@dataclass(frozen=True)
class IntervalTrace:
    """Everything :func:`solve_interval` built, in original item indices."""

    allocation: Allocation
    chain: AllocationSequence
    z1: frozenset[int]
    z2: frozenset[int]
    x_min: frozenset[int]
    x_max: frozenset[int]
    chosen: int


def _relabel(items, perm) -> frozenset[int]:
    return frozenset(perm[i] for i in items)


def solve_interval_traced(instance: Instance, spec: IntervalSpec | None) -> IntervalTrace:
    _two_monotone(instance)
    if spec is None:
        raise WrongSolver("the interval solver needs an interval representation")
    if len(spec) != instance.num_items or interval_to_graph(spec) != instance.graph:
        raise WrongSolver("interval representation does not match the conflict graph")
    ident = absolute_valuation(instance)
    val = ident.valuations
    g = instance.graph
    order = spec.finish_order()  # sorted position -> item
    ivs = [spec.intervals[i] for i in order]

    _, (t1, t2) = greedy_schedule(ivs, 2)
    z1, z2 = set(_relabel(t1, order)), set(_relabel(t2, order))
    if val.value_mask(0, mask_of(z1)) < val.value_mask(0, mask_of(z2)):
        z1, z2 = z2, z1
    for p in range(len(order)):
        o = order[p]
        if o in z2 and not any(g.adjacent(o, w) for w in z1):
            z2.discard(o)
            z1.add(o)
    z1, z2 = frozenset(z1), frozenset(z2)
    if not g.is_maximal_independent(z1):
        raise AssertionError("Z1 is not a maximal independent set")

    # min-conf grows with the left endpoint, so breaking its ties by latest
    # start turns the X_min pass into the mirrored (latest-start) greedy,
    # which is optimal on the complement of Z1
    late_start = [0] * len(order)
    for k, o in enumerate(sorted(range(len(order)), key=lambda o: -spec.intervals[o][0])):
        late_start[o] = k
    seq = build_sequence(g, z1, order, min_tiebreak=late_start)
    x_min = Allocation.from_masks([seq.x_min])[0]
    x_max = Allocation.from_masks([seq.x_max])[0]
    if not len(z2) == len(x_min) == len(x_max):
        raise AssertionError(f"|Z2|={len(z2)}, |Xmin|={len(x_min)}, |Xmax|={len(x_max)} differ")

    # exchanges run through the earliest-finish greedy set on the complement of Z1
    pos = {o: p for p, o in enumerate(order)}
    rest = [p for p in range(len(order)) if order[p] not in z1]
    gsub, _ = greedy_schedule([ivs[p] for p in rest], 1)
    greedy_rest = sorted(rest[k] for k in gsub)

    def bridge(src, dst):
        a = exchange_sequence(greedy_rest, sorted(pos[o] for o in src), ivs)
        b = exchange_sequence(greedy_rest, sorted(pos[o] for o in dst), ivs)
        return [_relabel(x, order) for x in a + b[::-1][1:]]

    z1m = mask_of(z1)
    prefix = [(z1m, mask_of(x)) for x in bridge(z2, x_min)]
    suffix = [(mask_of(x), z1m) for x in bridge(x_max, z2)]
    masks = prefix[:-1] + list(seq.masks) + suffix[1:]
    origins = (("exchange-prefix",) * (len(prefix) - 1) + seq.origins
               + ("exchange-suffix",) * (len(suffix) - 1))
    chain = AllocationSequence(tuple(masks), origins, seq.s, seq.x_min, seq.x_max, seq.bounds)
    for k, pair in enumerate(masks):
        if checkers.maximal_mask(g, pair) is not None:
            raise AssertionError(f"chain allocation {k} is not maximal")
    chosen = scan_chain(masks, val)
    alloc = cut_and_choose(instance, Allocation.from_masks(masks[chosen]))
    return IntervalTrace(alloc, chain, z1, z2, x_min, x_max, chosen)


def solve_interval(instance: Instance, spec: IntervalSpec | None) -> Allocation:
    """Maximal EF1 allocation for two agents on an interval conflict graph."""
    return solve_interval_traced(instance, spec).allocation
