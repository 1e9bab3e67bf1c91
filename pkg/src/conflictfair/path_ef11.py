"""Complete EF[1,1] allocations on a path for ``n >= 3`` identical additive agents.

Items are ranked by value and cut into groups of ``n``; each group becomes a
clique, the path (closed into a cycle) becomes a Hamiltonian cycle, and a
nine-vertex gadget replaces every path edge that would duplicate a clique
edge.  Any proper ``n``-colouring of the resulting cycle-plus-cliques graph
gives each agent one item per group.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from . import checkers, kernels
from .core import AdditiveValuation, Allocation, Instance, UniformValuation
from .errors import PreconditionError, UnsupportedValuation, ValidationError, WrongSolver

GADGET_SIZE = 9
# 0-based gadget vertices: triples and the internal path g1-g7-g4-g9-g6-g8-g3-g5-g2
GADGET_TRIPLES = ((0, 1, 2), (3, 4, 5), (6, 7, 8))
GADGET_PATH = (0, 6, 3, 8, 5, 7, 2, 4, 1)


@dataclass
class CliqueCycleGraph:
    """Cycle-plus-cliques graph ``H`` and the bookkeeping needed to read it back.

    Vertices ``0..num_real-1`` are the instance items, the next ``dummies``
    are zero-valued padding items and the rest are gadget vertices.
    """

    num_real: int
    n: int
    num_vertices: int
    rank: list[int]  # rank (0 = most preferred) of every item vertex, dummies included
    dummies: list[int]
    cliques: list[tuple[int, ...]]
    cycle: list[int]  # Hamiltonian cycle as a vertex sequence
    gadgets: list[tuple[int, int, int]] = field(default_factory=list)  # (a, b, first gadget vertex)
    path_order: list[int] = field(default_factory=list)  # path with dummies appended

    @property
    def num_items(self) -> int:
        return self.num_real + len(self.dummies)

    def groups(self) -> list[tuple[int, ...]]:
        by_rank = sorted(range(self.num_items), key=lambda v: self.rank[v])
        return [tuple(by_rank[k:k + self.n]) for k in range(0, self.num_items, self.n)]

    def clique_edges(self) -> set[tuple[int, int]]:
        out = set()
        for c in self.cliques:
            for i, u in enumerate(c):
                for w in c[i + 1:]:
                    out.add((min(u, w), max(u, w)))
        return out

    def cycle_edges(self) -> set[tuple[int, int]]:
        cyc = self.cycle
        return {(min(a, b), max(a, b)) for a, b in zip(cyc, cyc[1:] + cyc[:1])}

    def neighbours(self) -> list[set[int]]:
        nb = [set() for _ in range(self.num_vertices)]
        for u, w in self.clique_edges() | self.cycle_edges():
            nb[u].add(w)
            nb[w].add(u)
        return nb

    def to_json(self) -> dict:
        kind = ["item"] * self.num_real + ["dummy"] * len(self.dummies)
        kind += ["gadget"] * (self.num_vertices - len(kind))
        return {
            "n": self.n,
            "vertices": [{"id": v, "kind": kind[v], "rank": self.rank[v] if v < self.num_items else None}
                         for v in range(self.num_vertices)],
            "cliques": [list(c) for c in self.cliques],
            "cycle": list(self.cycle),
            "gadgets": [{"between": [a, b], "first_vertex": g} for a, b, g in self.gadgets],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def check_clique_cycle(h: CliqueCycleGraph, graph=None) -> None:
    """Raise ``AssertionError`` unless ``h`` is a valid cycle-plus-cliques graph.

    With ``graph`` (the path conflict graph) also check that ``H`` contains it.
    """
    seen = set()
    for c in h.cliques:
        if len(c) > h.n:
            raise AssertionError(f"clique {c} larger than n={h.n}")
        if seen & set(c):
            raise AssertionError(f"clique {c} overlaps another clique")
        seen |= set(c)
    cyc = h.cycle
    if sorted(cyc) != list(range(h.num_vertices)):
        raise AssertionError("cycle is not Hamiltonian")
    if h.num_vertices >= 3 and len(h.cycle_edges()) != h.num_vertices:
        raise AssertionError("cycle repeats an edge")
    if h.clique_edges() & h.cycle_edges():
        raise AssertionError("a cycle edge duplicates a clique edge")
    if graph is not None:
        have = h.clique_edges() | h.cycle_edges()
        missing = [e for e in graph.edges if e not in have]
        if missing:
            raise AssertionError(f"H misses conflict edges {missing}")


def _identical_values(instance: Instance) -> list[Fraction]:
    val = instance.valuations
    if isinstance(val, UniformValuation):
        val = val.as_additive()
    if not isinstance(val, AdditiveValuation):
        raise UnsupportedValuation("the path construction needs additive valuations")
    if not val.identical:
        raise UnsupportedValuation("the path construction needs identical valuations")
    return list(val.values[0])


def build_clique_cycle(instance: Instance, n: int | None = None) -> CliqueCycleGraph:
    """Build ``H`` for a path conflict graph and ``n`` agents."""
    n = instance.num_agents if n is None else n
    if n < 3:
        raise WrongSolver("use the two-agent solvers for n < 3")
    g = instance.graph
    order = g.path_order()
    if order is None:
        raise WrongSolver("conflict graph is not a path")
    values = _identical_values(instance)
    m = instance.num_items
    if m == 0:
        return CliqueCycleGraph(0, n, 0, [], [], [], [], [], [])
    if order[0] > order[-1]:
        order = order[::-1]
    d = (-m) % n
    dummies = list(range(m, m + d))
    path = order + dummies  # dummies extend the higher-index end
    total = m + d
    vals = values + [Fraction(0)] * d
    by_rank = sorted(range(total), key=lambda v: (-vals[v], v))
    rank = [0] * total
    for r, v in enumerate(by_rank):
        rank[v] = r
    group = [rank[v] // n for v in range(total)]
    cliques = [tuple(by_rank[k:k + n]) for k in range(0, total, n)]
    cliques = [c for c in cliques if len(c) > 1]

    gadgets = []
    next_vertex = total
    cycle = []

    def link(a, b):
        # a is already on the cycle; b follows, possibly via a gadget
        nonlocal next_vertex
        if group[a] == group[b]:
            base = next_vertex
            next_vertex += GADGET_SIZE
            gadgets.append((a, b, base))
            cliques.extend(tuple(base + x for x in t) for t in GADGET_TRIPLES)
            cycle.extend(base + x for x in GADGET_PATH)

    cycle.append(path[0])
    for a, b in zip(path, path[1:]):
        link(a, b)
        cycle.append(b)
    if total >= 2:
        link(path[-1], path[0])
    return CliqueCycleGraph(m, n, next_vertex, rank, dummies, cliques, cycle, gadgets, path)


def color_clique_cycle(h: CliqueCycleGraph, max_nodes: int = 10**8) -> list[int]:
    """Proper colouring of ``H`` with colours ``0..n-1``.

    Backtracking in cycle order with the first clique pinned to ``0, 1, ..``.
    A colouring always exists, so failure means ``H`` is malformed.
    """
    if h.num_vertices == 0:
        return []
    nbrs = [sorted(s) for s in h.neighbours()]
    pinned = [-1] * h.num_vertices
    if h.cliques:
        for c, v in enumerate(h.cliques[0]):
            pinned[v] = c
    stats = [0]
    try:
        col = kernels.color_graph(h.num_vertices, nbrs, h.n, h.cycle, pinned, max_nodes, stats)
    except kernels.NodeBudgetExceeded:
        raise PreconditionError(f"colouring search exceeded {max_nodes} nodes") from None
    if col is None:
        check_clique_cycle(h)
        raise AssertionError("no proper colouring found although H passed the structural audit")
    return col


def is_proper_coloring(h: CliqueCycleGraph, coloring) -> bool:
    if len(coloring) != h.num_vertices or any(not 0 <= c < h.n for c in coloring):
        return False
    return all(coloring[u] != coloring[w] for u, w in h.clique_edges() | h.cycle_edges())


def allocation_from_coloring(instance: Instance, h: CliqueCycleGraph, coloring) -> Allocation:
    """Colour ``c`` goes to agent ``c``; dummies and gadget vertices are dropped."""
    if not is_proper_coloring(h, coloring):
        raise ValidationError("colouring of H is not proper")
    bundles = [set() for _ in range(h.n)]
    for v in range(h.num_real):
        bundles[coloring[v]].add(v)
    for grp in h.groups():
        if len({coloring[v] for v in grp}) != len(grp):
            raise AssertionError(f"group {grp} gives one agent two items")
    return Allocation(bundles)


def solve_path_ef11(instance: Instance) -> Allocation:
    """Complete EF[1,1] allocation for a path and ``n >= 3`` identical additive agents."""
    h = build_clique_cycle(instance)
    check_clique_cycle(h, instance.graph)
    alloc = allocation_from_coloring(instance, h, color_clique_cycle(h))
    res = checkers.is_ef11(instance, alloc)
    if not res or not checkers.is_complete(instance, alloc):
        raise AssertionError(f"path construction produced a bad allocation: {res.witness}")
    return alloc
