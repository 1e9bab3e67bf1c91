"""Brute-force ground truth for small instances.

Two independent enumerators exist: the pruned backtracker in
:mod:`conflictfair.kernels` (used everywhere) and a plain product-space
filter (:func:`naive_allocations`), kept only so tests can compare them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from . import checkers, kernels
from .core import Allocation, Instance, feasible_masks, iter_bits
from .errors import BudgetExhausted, Inconclusive, PreconditionError, ValidationError

MODES = {"feasible": kernels.FEASIBLE, "maximal": kernels.MAXIMAL, "complete": kernels.COMPLETE}
REQUIREMENTS = ("ef", "ef1", "efx", "ef11", "maximal", "complete")


@dataclass(frozen=True)
class EnumerationBudget:
    """Search limits: backtracking nodes and an optional item cap."""

    max_states: int = 10**8
    max_items: int | None = None

    def __post_init__(self):
        if self.max_states <= 0 or (self.max_items is not None and self.max_items <= 0):
            raise ValidationError("budget limits must be positive")

    def admit(self, instance: Instance) -> None:
        if self.max_items is not None and instance.num_items > self.max_items:
            raise BudgetExhausted(
                f"{instance.num_items} items exceed the oracle cap of {self.max_items}", 0)


DEFAULT_BUDGET = EnumerationBudget()


def _check_symmetric(instance: Instance, symmetric: bool) -> None:
    if symmetric and not instance.valuations.identical:
        raise PreconditionError("agent-symmetry reduction needs identical valuations")


def enumerate_allocations(instance: Instance, mode: str = "feasible",
                          budget: EnumerationBudget | None = None, symmetric: bool = False,
                          stats: list | None = None) -> Iterator[tuple[int, ...]]:
    """Yield bundle-mask tuples of every allocation in ``mode`` exactly once.

    ``stats[0]`` tracks visited search nodes.  Running out of budget raises
    :class:`BudgetExhausted` after whatever was already yielded.
    """
    budget = budget or DEFAULT_BUDGET
    budget.admit(instance)
    _check_symmetric(instance, symmetric)
    try:
        code = MODES[mode]
    except KeyError:
        raise ValidationError(f"unknown enumeration mode {mode!r}") from None
    stats = stats if stats is not None else [0]
    gen = kernels.enumerate_allocations(instance.num_items, instance.num_agents,
                                        instance.graph.adjacency, code, symmetric,
                                        budget.max_states, stats)
    count = 0
    try:
        for masks in gen:
            count += 1
            yield masks
    except kernels.NodeBudgetExceeded:
        raise BudgetExhausted(
            f"enumeration stopped after {budget.max_states} nodes ({count} allocations produced)",
            stats[0]) from None


def enumerate_maximal(instance: Instance, budget: EnumerationBudget | None = None,
                      symmetric: bool = False) -> Iterator[Allocation]:
    for masks in enumerate_allocations(instance, "maximal", budget, symmetric):
        yield Allocation.from_masks(masks)


def naive_allocations(instance: Instance, mode: str = "feasible") -> Iterator[tuple[int, ...]]:
    """Filter all ``(n+1)^m`` assignments; the reference for differential tests."""
    n, m = instance.num_agents, instance.num_items
    g = instance.graph
    for assign in itertools.product(range(n + 1), repeat=m):
        masks = [0] * n
        for item, a in enumerate(assign):
            if a < n:
                masks[a] |= 1 << item
        masks = tuple(masks)
        if not feasible_masks(g, masks):
            continue
        if mode == "complete" and n in assign:
            continue
        if mode == "maximal" and checkers.maximal_mask(g, masks) is not None:
            continue
        yield masks


@dataclass(frozen=True)
class ExistenceResult:
    """Outcome of :func:`exists_allocation`.

    ``witness`` is ``None`` exactly when the search was exhaustive and found
    nothing, i.e. non-existence is certified.
    """

    witness: Allocation | None
    requirements: tuple[str, ...]
    nodes: int
    examined: int

    @property
    def certified_none(self) -> bool:
        return self.witness is None


def _normalise(require: Iterable[str]) -> tuple[str, ...]:
    out = []
    for r in require:
        r = r.strip().lower()
        if r not in REQUIREMENTS:
            raise ValidationError(f"unknown requirement {r!r}; known: {', '.join(REQUIREMENTS)}")
        if r not in out:
            out.append(r)
    return tuple(out)


_MASK_TESTS = {
    "ef": checkers.envy_free_mask,
    "ef1": checkers.ef1_mask,
    "efx": checkers.efx_mask,
    "ef11": checkers.ef11_mask,
}


def _mode_for(req: tuple[str, ...]) -> str:
    return "complete" if "complete" in req else "maximal" if "maximal" in req else "feasible"


def count_allocations(instance: Instance, require: Iterable[str],
                      budget: EnumerationBudget | None = None) -> int:
    """Number of allocations meeting every requirement (no symmetry reduction)."""
    req = _normalise(require)
    tests = [_MASK_TESTS[r] for r in req if r in _MASK_TESTS]
    val = instance.valuations
    return sum(1 for masks in enumerate_allocations(instance, _mode_for(req), budget)
               if all(t(val, masks) is None for t in tests))


def exists_allocation(instance: Instance, require: Iterable[str],
                      budget: EnumerationBudget | None = None, symmetric: bool = False,
                      naive: bool = False) -> ExistenceResult:
    """Search for an allocation meeting every requirement.

    ``maximal`` and ``complete`` select the enumerated universe; the
    fairness requirements are filtered per allocation.  Raises
    :class:`Inconclusive` when the budget runs out first.
    """
    req = _normalise(require)
    mode = _mode_for(req)
    tests = [_MASK_TESTS[r] for r in req if r in _MASK_TESTS]
    val = instance.valuations
    stats = [0]
    examined = 0
    if naive:
        _check_symmetric(instance, symmetric)
        source = naive_allocations(instance, mode)
    else:
        source = enumerate_allocations(instance, mode, budget, symmetric, stats)
    try:
        for masks in source:
            examined += 1
            if all(t(val, masks) is None for t in tests):
                return ExistenceResult(Allocation.from_masks(masks), req, stats[0], examined)
    except BudgetExhausted as exc:
        raise Inconclusive(f"no witness found before the budget ran out: {exc}", exc.nodes) from None
    return ExistenceResult(None, req, stats[0], examined)


def pareto_optimal_allocations(instance: Instance, universe: str = "feasible",
                               budget: EnumerationBudget | None = None) -> list[Allocation]:
    """All allocations of ``universe`` that no member of ``universe`` dominates."""
    n = instance.num_agents
    val = instance.valuations
    rows = []
    for masks in enumerate_allocations(instance, universe, budget):
        rows.append((tuple(val.value_mask(a, masks[a]) for a in range(n)), masks))
    vectors = {vec for vec, _ in rows}

    def dominated(vec):
        return any(all(o[a] >= vec[a] for a in range(n)) and o != vec for o in vectors)

    keep = {vec for vec in vectors if not dominated(vec)}
    return [Allocation.from_masks(masks) for vec, masks in rows if vec in keep]


def inverse_value(instance: Instance, mask: int) -> Fraction:
    """``v^-1(S) = min_j v(S \\ {j})`` with ``v^-1(empty) = 0``."""
    val = instance.valuations
    if not mask:
        return Fraction(0)
    return min(val.value_mask(0, mask & ~(1 << j)) for j in iter_bits(mask))


def compute_gamma(instance: Instance, budget: EnumerationBudget | None = None) -> Fraction:
    """Minimum over maximal allocations of ``max_{i,i'} v^-1(A_i) - v(A_i')``.

    The pair ``i = i'`` is included, as the formula is written.
    """
    if not instance.valuations.identical:
        raise PreconditionError("gamma is defined for identical valuations")
    val = instance.valuations
    best = None
    for masks in enumerate_allocations(instance, "maximal", budget, symmetric=True):
        inv = max(inverse_value(instance, mk) for mk in masks)
        worst = min(val.value_mask(0, mk) for mk in masks)
        score = inv - worst
        if best is None or score < best:
            best = score
    if best is None:
        raise PreconditionError("instance has no maximal allocation")
    return best
