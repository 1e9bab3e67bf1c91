"""Reduction from Independent Set to maximal-EF1 existence.

Given a small identical-valuation instance ``Ĩ`` with no maximal EF1
allocation and an IS instance ``(H, t)``, :func:`build_reduction` emits an
instance that has a maximal EF1 allocation exactly when ``H`` has an
independent set of size ``t``.

Item layout of the output: the items of ``Ĩ`` first, then the blocks
``X_1 .. X_n`` (one copy of ``V_H`` each, worth ``λ`` per item), then the
zero-valued blocks ``Y_1 .. Y_n``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

from . import oracle
from .core import AdditiveValuation, ConflictGraph, Instance, Monotonicity, RuleValuation, UniformValuation
from .errors import PreconditionError, ValidationError


@dataclass
class ReductionArtifacts:
    gamma: Fraction
    lam: Fraction
    t: int
    base_items: int
    num_agents: int
    h_vertices: int
    x_blocks: list[tuple[int, int]]  # half-open item ranges, one per agent
    y_blocks: list[tuple[int, int]]
    edges: dict[str, list[tuple[int, int]]] = field(default_factory=dict)

    @property
    def num_items(self) -> int:
        return self.base_items + 2 * self.num_agents * self.h_vertices

    def x_item(self, agent: int, w: int) -> int:
        return self.x_blocks[agent][0] + w

    def y_item(self, agent: int, w: int) -> int:
        return self.y_blocks[agent][0] + w

    def to_json(self) -> dict:
        return {
            "gamma": str(self.gamma),
            "lambda": str(self.lam),
            "t": self.t,
            "base_items": self.base_items,
            "num_agents": self.num_agents,
            "h_vertices": self.h_vertices,
            "x_blocks": [list(b) for b in self.x_blocks],
            "y_blocks": [list(b) for b in self.y_blocks],
            "edges": {k: [list(e) for e in v] for k, v in self.edges.items()},
            "edge_counts": {k: len(v) for k, v in self.edges.items()},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _labels(base: Instance, n: int, k: int) -> tuple[str, ...]:
    out = list(base.item_labels())
    out += [f"x{i + 1}_{w + 1}" for i in range(n) for w in range(k)]
    out += [f"y{i + 1}_{w + 1}" for i in range(n) for w in range(k)]
    return tuple(out)


def build_reduction(base: Instance, h: ConflictGraph, t: int,
                    budget: oracle.EnumerationBudget | None = None,
                    certify: bool = True) -> tuple[Instance, ReductionArtifacts]:
    """Build the reduced instance for ``(H, t)``.

    ``γ`` is always recomputed by brute force.  With ``certify`` the oracle
    also confirms that ``base`` has no maximal EF1 allocation.
    """
    if t < 1:
        raise ValidationError("t must be at least 1")
    if not base.valuations.identical:
        raise PreconditionError("the base instance needs identical valuations")
    if certify:
        res = oracle.exists_allocation(base, ["ef1", "maximal"], budget, symmetric=True)
        if not res.certified_none:
            raise PreconditionError(
                f"the base instance has a maximal EF1 allocation {res.witness.pretty(base)}")
    gamma = oracle.compute_gamma(base, budget)
    if gamma <= 0:
        raise PreconditionError(f"gamma must be positive, got {gamma}")
    lam = gamma / t

    n, mt, k = base.num_agents, base.num_items, h.num_items
    x_blocks = [(mt + i * k, mt + (i + 1) * k) for i in range(n)]
    y_blocks = [(mt + (n + i) * k, mt + (n + i + 1) * k) for i in range(n)]
    art = ReductionArtifacts(gamma, lam, t, mt, n, k, x_blocks, y_blocks)
    hv = sorted(h.edges)
    e1 = sorted(base.graph.edges)
    e2 = [(art.x_item(i, u), art.x_item(i, w)) for i in range(n) for u, w in hv]
    e3 = [(art.x_item(i, w), art.y_item(i, w)) for i in range(n) for w in range(k)]
    block = [list(range(*x_blocks[i])) + list(range(*y_blocks[i])) for i in range(n)]
    e4 = [(a, b) for i, j in itertools.combinations(range(n), 2) for a in block[i] for b in block[j]]
    art.edges = {"i": e1, "ii": e2, "iii": e3, "iv": e4}
    m = art.num_items
    graph = ConflictGraph(m, e1 + e2 + e3 + e4)

    bv = base.valuations
    if isinstance(bv, UniformValuation):
        bv = bv.as_additive()
    if isinstance(bv, AdditiveValuation):
        row = list(bv.values[0]) + [lam] * (n * k) + [Fraction(0)] * (n * k)
        val = AdditiveValuation.identical_values(row, n)
    else:
        bonus = 0
        for lo, hi in x_blocks:
            for o in range(lo, hi):
                bonus |= 1 << o
        mono = bv.monotone if bv.monotone is Monotonicity.NONDECREASING else Monotonicity.NONE
        val = RuleValuation("reduction", n, m, params=(mt, bonus, lam), base=bv, monotone=mono)
    return Instance(graph, val, _labels(base, n, k)), art


def has_independent_set(h: ConflictGraph, t: int) -> bool:
    """Brute force: does ``H`` have an independent set of size ``t``?"""
    if t <= 0:
        return True
    return any(h.is_independent(c) for c in itertools.combinations(range(h.num_items), t))


def verify_reduction(instance: Instance, expected: bool,
                     budget: oracle.EnumerationBudget | None = None) -> bool:
    """True iff the oracle's maximal-EF1 verdict on ``instance`` equals ``expected``.

    Raises :class:`~conflictfair.errors.Inconclusive` when the budget runs out.
    """
    res = oracle.exists_allocation(instance, ["ef1", "maximal"], budget,
                                   symmetric=instance.valuations.identical)
    return (res.witness is not None) == expected
