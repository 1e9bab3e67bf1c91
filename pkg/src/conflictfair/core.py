"""Domain model: conflict graphs, exact valuation profiles, instances, allocations.

All values are :class:`fractions.Fraction`; floats are rejected at the
boundary so that every comparison made by the checkers and solvers is exact.
Items are 0-based indices; labels exist only for display and file IO.

Internally sets of items are frequently handled as bitmasks (bit ``i`` set
iff item ``i`` is present).  Valuations expose both a set-based and a
mask-based query; the mask path is memoised per profile.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import (
    IncompleteValuation,
    InfeasibleAllocation,
    MalformedAllocation,
    UnsupportedValuation,
    ValidationError,
)

#: Table valuations store up to 2^m rows; refuse anything bigger than this.
TABLE_MAX_ITEMS = 20


def as_fraction(x) -> Fraction:
    """Convert ``int``, ``Fraction`` or a ``"p/q"`` string to a Fraction.

    Floats are refused on purpose: they would silently break tie handling.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not valuations")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {x!r}") from exc
    raise TypeError(f"expected int, Fraction or rational string, got {type(x).__name__}")


def mask_of(items: Iterable[int]) -> int:
    m = 0
    for i in items:
        m |= 1 << i
    return m


def items_of(mask: int) -> frozenset[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# ---------------------------------------------------------------------------
# Conflict graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConflictGraph:
    """Undirected simple graph over items ``0 .. num_items-1``."""

    num_items: int
    edges: frozenset[tuple[int, int]]
    adjacency: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __init__(self, num_items: int, edges: Iterable[Sequence[int]] = ()):
        if num_items < 0:
            raise ValidationError("num_items must be non-negative")
        norm = set()
        for e in edges:
            u, w = (int(x) for x in e)
            if u == w:
                raise ValidationError(f"self-loop on item {u}")
            if not (0 <= u < num_items and 0 <= w < num_items):
                raise ValidationError(f"edge ({u},{w}) has an endpoint outside 0..{num_items - 1}")
            pair = (u, w) if u < w else (w, u)
            if pair in norm:
                raise ValidationError(f"duplicate edge {pair}")
            norm.add(pair)
        adj = [0] * num_items
        for u, w in norm:
            adj[u] |= 1 << w
            adj[w] |= 1 << u
        object.__setattr__(self, "num_items", num_items)
        object.__setattr__(self, "edges", frozenset(norm))
        object.__setattr__(self, "adjacency", tuple(adj))

    @classmethod
    def path(cls, m: int) -> "ConflictGraph":
        return cls(m, [(i, i + 1) for i in range(m - 1)])

    @classmethod
    def cycle(cls, m: int) -> "ConflictGraph":
        if m < 3:
            raise ValidationError("a simple cycle needs at least 3 vertices")
        return cls(m, [(i, (i + 1) % m) for i in range(m)])

    @classmethod
    def complete(cls, m: int) -> "ConflictGraph":
        return cls(m, [(i, j) for i in range(m) for j in range(i + 1, m)])

    @classmethod
    def complete_bipartite(cls, left: Sequence[int], right: Sequence[int], m: int) -> "ConflictGraph":
        return cls(m, [(u, w) for u in left for w in right])

    def adjacent(self, u: int, w: int) -> bool:
        return bool(self.adjacency[u] >> w & 1)

    def neighbors(self, u: int) -> frozenset[int]:
        return items_of(self.adjacency[u])

    def degree(self, u: int) -> int:
        return bin(self.adjacency[u]).count("1")

    def is_independent(self, items: Iterable[int]) -> bool:
        return self.is_independent_mask(mask_of(items))

    def is_independent_mask(self, mask: int) -> bool:
        for i in iter_bits(mask):
            if self.adjacency[i] & mask:
                return False
        return True

    def is_maximal_independent(self, items: Iterable[int]) -> bool:
        mask = mask_of(items)
        if not self.is_independent_mask(mask):
            return False
        return all(mask >> i & 1 or self.adjacency[i] & mask for i in range(self.num_items))

    def greedy_extend(self, items: Iterable[int], order: Iterable[int] | None = None) -> frozenset[int]:
        """Extend an independent set to a maximal one, scanning ``order``."""
        mask = mask_of(items)
        for i in range(self.num_items) if order is None else order:
            if not mask >> i & 1 and not self.adjacency[i] & mask:
                mask |= 1 << i
        return items_of(mask)

    def two_coloring(self) -> list[int] | None:
        """Proper 2-colouring (0/1) or ``None`` if the graph has an odd cycle.

        Isolated vertices get colour 0.
        """
        color = [-1] * self.num_items
        for s in range(self.num_items):
            if color[s] != -1:
                continue
            color[s] = 0
            stack = [s]
            while stack:
                u = stack.pop()
                for w in iter_bits(self.adjacency[u]):
                    if color[w] == -1:
                        color[w] = 1 - color[u]
                        stack.append(w)
                    elif color[w] == color[u]:
                        return None
        return color

    def is_connected(self) -> bool:
        if self.num_items == 0:
            return True
        seen = 1
        frontier = 1
        while frontier:
            nxt = 0
            for u in iter_bits(frontier):
                nxt |= self.adjacency[u]
            frontier = nxt & ~seen
            seen |= nxt
        return seen == (1 << self.num_items) - 1

    def is_tree(self) -> bool:
        return len(self.edges) == self.num_items - 1 and self.is_connected()

    def path_order(self) -> list[int] | None:
        """Vertex sequence if the graph is a single path, else ``None``."""
        m = self.num_items
        if m <= 1:
            return list(range(m))
        if len(self.edges) != m - 1 or not self.is_connected():
            return None
        degs = [self.degree(u) for u in range(m)]
        if max(degs) > 2:
            return None
        start = min(u for u in range(m) if degs[u] == 1)
        order = [start]
        prev = -1
        cur = start
        while len(order) < m:
            nxt = next(w for w in iter_bits(self.adjacency[cur]) if w != prev)
            order.append(nxt)
            prev, cur = cur, nxt
        return order


# ---------------------------------------------------------------------------
# Valuations
# ---------------------------------------------------------------------------


class Monotonicity(str, enum.Enum):
    NONDECREASING = "nondecreasing"
    NONINCREASING = "nonincreasing"
    NONE = "none"

    def flipped(self) -> "Monotonicity":
        if self is Monotonicity.NONDECREASING:
            return Monotonicity.NONINCREASING
        if self is Monotonicity.NONINCREASING:
            return Monotonicity.NONDECREASING
        return self


class ValuationProfile:
    """Per-agent set valuations with ``value(i, {}) == 0``.

    Subclasses implement :meth:`_value_mask`; the public queries add range
    checks and memoisation.
    """

    kind: str = "abstract"
    num_agents: int
    num_items: int
    monotone: Monotonicity

    @property
    def identical(self) -> bool:
        raise NotImplementedError

    def _value_mask(self, agent: int, mask: int) -> Fraction:
        raise NotImplementedError

    def value_mask(self, agent: int, mask: int) -> Fraction:
        if self.identical:
            agent = 0
        cache = self._cache
        key = (agent, mask)
        try:
            return cache[key]
        except KeyError:
            pass
        val = Fraction(0) if mask == 0 else self._value_mask(agent, mask)
        cache[key] = val
        return val

    def value(self, agent: int, items: Iterable[int]) -> Fraction:
        if not 0 <= agent < self.num_agents:
            raise IndexError(f"agent {agent} out of range")
        mask = 0
        for i in items:
            if not 0 <= i < self.num_items:
                raise IndexError(f"item {i} out of range")
            mask |= 1 << i
        return self.value_mask(agent, mask)

    def negated(self) -> "ValuationProfile":
        return RuleValuation("negate", self.num_agents, self.num_items, base=self,
                             monotone=self.monotone.flipped())

    def with_agents(self, num_agents: int) -> "ValuationProfile":
        """Same identical valuation for a different number of agents."""
        raise UnsupportedValuation(f"{self.kind} profile cannot be resized")

    def is_additive(self) -> bool:
        return False


@dataclass(frozen=True, eq=False)
class AdditiveValuation(ValuationProfile):
    """One value vector per agent; ``v_i(S) = sum of v_i(o) over o in S``."""

    values: tuple[tuple[Fraction, ...], ...]
    kind = "additive"
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        rows = tuple(tuple(as_fraction(x) for x in row) for row in self.values)
        if not rows:
            raise ValidationError("need at least one agent")
        if len({len(r) for r in rows}) != 1:
            raise ValidationError("value rows have different lengths")
        object.__setattr__(self, "values", rows)

    @classmethod
    def identical_values(cls, values: Sequence, num_agents: int) -> "AdditiveValuation":
        row = tuple(as_fraction(x) for x in values)
        return cls(tuple(row for _ in range(num_agents)))

    @property
    def num_agents(self) -> int:
        return len(self.values)

    @property
    def num_items(self) -> int:
        return len(self.values[0])

    @property
    def identical(self) -> bool:
        return all(r == self.values[0] for r in self.values)

    @property
    def monotone(self) -> Monotonicity:
        flat = [x for r in self.values for x in r]
        if all(x >= 0 for x in flat):
            return Monotonicity.NONDECREASING
        if all(x <= 0 for x in flat):
            return Monotonicity.NONINCREASING
        return Monotonicity.NONE

    def _value_mask(self, agent, mask):
        row = self.values[agent]
        return sum((row[i] for i in iter_bits(mask)), Fraction(0))

    def negated(self):
        return AdditiveValuation(tuple(tuple(-x for x in r) for r in self.values))

    def with_agents(self, num_agents):
        if not self.identical:
            raise UnsupportedValuation("only identical profiles can be resized")
        return AdditiveValuation.identical_values(self.values[0], num_agents)

    def is_additive(self):
        return True

    def __eq__(self, other):
        return isinstance(other, AdditiveValuation) and self.values == other.values

    __hash__ = None


@dataclass(frozen=True, eq=False)
class UniformValuation(ValuationProfile):
    """``v_i(S) = |S|`` for every agent."""

    num_agents: int
    num_items: int
    kind = "uniform"
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def identical(self):
        return True

    @property
    def monotone(self):
        return Monotonicity.NONDECREASING

    def _value_mask(self, agent, mask):
        return Fraction(bin(mask).count("1"))

    def with_agents(self, num_agents):
        return UniformValuation(num_agents, self.num_items)

    def is_additive(self):
        return True

    def as_additive(self) -> AdditiveValuation:
        return AdditiveValuation.identical_values([1] * self.num_items, self.num_agents)

    def __eq__(self, other):
        return (isinstance(other, UniformValuation) and self.num_agents == other.num_agents
                and self.num_items == other.num_items)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class TableValuation(ValuationProfile):
    """Identical valuation given by an explicit subset table.

    ``default`` covers unlisted sets: a constant, the name of a rule, or
    ``None`` (unlisted sets raise :class:`IncompleteValuation`).
    """

    num_agents: int
    num_items: int
    entries: Mapping[frozenset, Fraction]
    default: Fraction | str | None = None
    monotone: Monotonicity = Monotonicity.NONE
    max_items: int = TABLE_MAX_ITEMS
    kind = "table"
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    _by_mask: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.num_items > self.max_items:
            raise ValidationError(
                f"table valuations are capped at {self.max_items} items (got {self.num_items})")
        by_mask = {}
        entries = {}
        for s, val in dict(self.entries).items():
            s = frozenset(s)
            if any(not 0 <= i < self.num_items for i in s):
                raise ValidationError(f"table entry {sorted(s)} has an item out of range")
            entries[s] = as_fraction(val)
            by_mask[mask_of(s)] = entries[s]
        if by_mask.get(0, 0) != 0:
            raise ValidationError("the empty set must be valued 0")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_by_mask", by_mask)
        if self.default is not None and not isinstance(self.default, str):
            object.__setattr__(self, "default", as_fraction(self.default))
        object.__setattr__(self, "monotone", Monotonicity(self.monotone))

    @property
    def identical(self):
        return True

    def _value_mask(self, agent, mask):
        try:
            return self._by_mask[mask]
        except KeyError:
            pass
        if self.default is None:
            raise IncompleteValuation(f"no table entry for {sorted(items_of(mask))}")
        if isinstance(self.default, str):
            return RuleValuation(self.default, 1, self.num_items)._value_mask(0, mask)
        return self.default

    def negated(self):
        default = self.default
        if isinstance(default, Fraction):
            default = -default
        elif isinstance(default, str):
            return super().negated()
        return TableValuation(self.num_agents, self.num_items,
                              {s: -v for s, v in self.entries.items()}, default,
                              self.monotone.flipped(), self.max_items)

    def with_agents(self, num_agents):
        return TableValuation(num_agents, self.num_items, self.entries, self.default,
                              self.monotone, self.max_items)

    def __eq__(self, other):
        return (isinstance(other, TableValuation) and self.num_agents == other.num_agents
                and self.num_items == other.num_items and self.entries == other.entries
                and self.default == other.default)

    __hash__ = None


RuleFn = Callable[["RuleValuation", int, int], Fraction]
RULES: dict[str, RuleFn] = {}


def rule(name: str):
    def deco(fn: RuleFn) -> RuleFn:
        RULES[name] = fn
        return fn
    return deco


@dataclass(frozen=True, eq=False)
class RuleValuation(ValuationProfile):
    """Valuation computed by a named built-in rule.

    ``params`` are rule-specific; ``base`` is the wrapped profile for the
    composite rules (``negate``, ``abs``, ``reduction``).
    """

    name: str
    num_agents: int
    num_items: int
    params: tuple = ()
    base: ValuationProfile | None = None
    monotone: Monotonicity = Monotonicity.NONE
    kind = "rule"
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.name not in RULES:
            raise ValidationError(f"unknown valuation rule {self.name!r}")
        object.__setattr__(self, "monotone", Monotonicity(self.monotone))

    @property
    def identical(self):
        if self.name == "abs":
            return True
        if self.base is not None:
            return self.base.identical
        return True

    def _value_mask(self, agent, mask):
        return RULES[self.name](self, agent, mask)

    def negated(self):
        if self.name == "negate":
            return self.base
        return super().negated()

    def with_agents(self, num_agents):
        base = self.base.with_agents(num_agents) if self.base is not None and self.name != "abs" else self.base
        return RuleValuation(self.name, num_agents, self.num_items, self.params, base, self.monotone)

    def __eq__(self, other):
        return (isinstance(other, RuleValuation) and self.name == other.name
                and self.num_agents == other.num_agents and self.num_items == other.num_items
                and self.params == other.params and self.base == other.base)

    __hash__ = None


_THM6_LOW = {0, 3}  # o1, o4
_THM6_PAIRS = {mask_of(p) for p in ((1, 6), (2, 6), (4, 6), (5, 6))}


@rule("thm6")
def _thm6(rv: RuleValuation, agent: int, mask: int) -> Fraction:
    # five-case rule over o1..o7 (indices 0..6)
    size = bin(mask).count("1")
    if size == 0:
        return Fraction(0)
    if size == 1:
        return Fraction(1 if mask.bit_length() - 1 in _THM6_LOW else 2)
    if mask in _THM6_PAIRS:
        return Fraction(3)
    return Fraction(4)


@rule("concave")
def _concave(rv: RuleValuation, agent: int, mask: int) -> Fraction:
    # params = (knee, w_0, ..., w_{m-1}); f(x) = min(2x, x + knee)
    knee, *weights = rv.params
    x = sum(weights[i] for i in iter_bits(mask))
    return Fraction(min(2 * x, x + knee))


@rule("negate")
def _negate(rv: RuleValuation, agent: int, mask: int) -> Fraction:
    return -rv.base.value_mask(agent, mask)


@rule("abs")
def _abs(rv: RuleValuation, agent: int, mask: int) -> Fraction:
    (source_agent,) = rv.params
    return abs(rv.base.value_mask(source_agent, mask))


@rule("reduction")
def _reduction(rv: RuleValuation, agent: int, mask: int) -> Fraction:
    # params = (base item count, bonus-item mask, per-bonus-item value)
    base_items, bonus_mask, lam = rv.params
    low = mask & ((1 << base_items) - 1)
    return rv.base.value_mask(agent, low) + lam * bin(mask & bonus_mask).count("1")


def verify_monotone(profile: ValuationProfile, samples: int = 200, seed: int = 0) -> bool:
    """Spot-check the declared monotonicity on random ``S ⊆ T`` pairs."""
    direction = profile.monotone
    if direction is Monotonicity.NONE:
        return True
    rng = random.Random(seed)
    m = profile.num_items
    for _ in range(samples):
        t = rng.getrandbits(m) if m else 0
        s = t & (rng.getrandbits(m) if m else 0)
        for agent in range(profile.num_agents):
            vs, vt = profile.value_mask(agent, s), profile.value_mask(agent, t)
            if direction is Monotonicity.NONDECREASING and vs > vt:
                return False
            if direction is Monotonicity.NONINCREASING and vs < vt:
                return False
    return True


# ---------------------------------------------------------------------------
# Instances and allocations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    graph: ConflictGraph
    valuations: ValuationProfile
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.valuations.num_agents < 1:
            raise ValidationError("an instance needs at least one agent")
        if self.valuations.num_items != self.graph.num_items:
            raise ValidationError(
                f"valuation covers {self.valuations.num_items} items, graph has {self.graph.num_items}")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.graph.num_items:
                raise ValidationError("one label per item required")
            object.__setattr__(self, "labels", labels)

    @property
    def num_agents(self) -> int:
        return self.valuations.num_agents

    @property
    def num_items(self) -> int:
        return self.graph.num_items

    def label(self, item: int) -> str:
        return self.labels[item] if self.labels else f"o{item + 1}"

    def item_labels(self) -> tuple[str, ...]:
        return tuple(self.label(i) for i in range(self.num_items))

    def value(self, agent: int, items: Iterable[int]) -> Fraction:
        return self.valuations.value(agent, items)

    def with_valuations(self, valuations: ValuationProfile) -> "Instance":
        return Instance(self.graph, valuations, self.labels)


@dataclass(frozen=True)
class Allocation:
    """Ordered family of disjoint bundles; unlisted items stay unallocated."""

    bundles: tuple[frozenset[int], ...]

    def __init__(self, bundles: Iterable[Iterable[int]]):
        object.__setattr__(self, "bundles", tuple(frozenset(b) for b in bundles))

    @classmethod
    def from_masks(cls, masks: Iterable[int]) -> "Allocation":
        return cls(items_of(m) for m in masks)

    @property
    def num_agents(self) -> int:
        return len(self.bundles)

    def masks(self) -> tuple[int, ...]:
        return tuple(mask_of(b) for b in self.bundles)

    def allocated(self) -> frozenset[int]:
        return frozenset().union(*self.bundles)

    def reversed(self) -> "Allocation":
        return Allocation(self.bundles[::-1])

    def __getitem__(self, agent: int) -> frozenset[int]:
        return self.bundles[agent]

    def __len__(self) -> int:
        return len(self.bundles)

    def __iter__(self):
        return iter(self.bundles)

    def pretty(self, instance: Instance | None = None) -> str:
        def name(i):
            return instance.label(i) if instance else str(i)
        return "(" + ", ".join("{" + ",".join(name(i) for i in sorted(b)) + "}" for b in self.bundles) + ")"


def _check_shape(instance: Instance, allocation: Allocation) -> None:
    if len(allocation.bundles) != instance.num_agents:
        raise MalformedAllocation(
            f"allocation has {len(allocation.bundles)} bundles for {instance.num_agents} agents")
    for b in allocation.bundles:
        for i in b:
            if not isinstance(i, int) or not 0 <= i < instance.num_items:
                raise MalformedAllocation(f"item index {i!r} out of range")


def feasible_masks(graph: ConflictGraph, masks: Sequence[int]) -> bool:
    seen = 0
    for mk in masks:
        if seen & mk or not graph.is_independent_mask(mk):
            return False
        seen |= mk
    return True


def is_feasible(instance: Instance, allocation: Allocation) -> bool:
    """Bundles pairwise disjoint and each an independent set."""
    _check_shape(instance, allocation)
    return feasible_masks(instance.graph, allocation.masks())


def require_feasible(instance: Instance, allocation: Allocation) -> tuple[int, ...]:
    if not is_feasible(instance, allocation):
        raise InfeasibleAllocation(f"allocation {allocation.pretty(instance)} is not feasible")
    return allocation.masks()


def bundle_value(instance: Instance, agent: int, items: Iterable[int]) -> Fraction:
    return instance.valuations.value(agent, items)


def negate_valuations(instance: Instance) -> Instance:
    """Same graph, valuation ``-v_i`` for every agent."""
    return instance.with_valuations(instance.valuations.negated())


def absolute_valuation(instance: Instance) -> Instance:
    """Identical two-agent instance valued by ``|v_1(S)|`` (non-decreasing)."""
    prof = instance.valuations
    if prof.monotone is Monotonicity.NONE:
        raise UnsupportedValuation("absolute valuation needs a monotone profile")
    if prof.num_agents != 2:
        raise UnsupportedValuation("absolute valuation is defined for two agents")
    if isinstance(prof, AdditiveValuation):
        row = tuple(abs(x) for x in prof.values[0])
        new = AdditiveValuation.identical_values(row, 2)
    elif isinstance(prof, UniformValuation):
        new = prof
    elif prof.monotone is Monotonicity.NONDECREASING and prof.identical:
        new = prof
    elif prof.identical:
        new = prof.negated()
    else:
        new = RuleValuation("abs", 2, prof.num_items, params=(0,), base=prof,
                            monotone=Monotonicity.NONDECREASING)
    return instance.with_valuations(new)
