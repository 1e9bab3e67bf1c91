"""Maximal equitable ``n``-colourings of trees.

Under uniform valuations such a colouring is exactly a maximal EF1
allocation: classes are independent, every uncoloured vertex sees every
class, and class sizes differ by at most one.

The recursion keeps the root either uncoloured or inside a largest class.
Children are combined by rotating each child's size-sorted classes past the
colours that are already "higher" (of maximum size).
"""

from __future__ import annotations

from dataclasses import dataclass

from . import checkers
from .core import Allocation, ConflictGraph, Instance, UniformValuation
from .errors import PreconditionError, UnsupportedValuation, ValidationError, WrongSolver


@dataclass(frozen=True)
class PartialColoring:
    classes: tuple[frozenset[int], ...]

    @property
    def n(self) -> int:
        return len(self.classes)

    def uncolored(self, num_vertices: int) -> frozenset[int]:
        used = frozenset().union(*self.classes)
        return frozenset(range(num_vertices)) - used

    def color_of(self, v: int) -> int | None:
        for c, cls in enumerate(self.classes):
            if v in cls:
                return c
        return None

    def violations(self, graph: ConflictGraph) -> list[str]:
        """Names of the broken invariants (empty when the colouring is valid)."""
        out = []
        seen = set()
        for cls in self.classes:
            if seen & cls:
                out.append("overlap")
            seen |= cls
        if any(not graph.is_independent(cls) for cls in self.classes):
            out.append("independence")
        for v in self.uncolored(graph.num_items):
            nb = graph.neighbors(v)
            if any(not nb & cls for cls in self.classes):
                out.append("maximality")
                break
        sizes = [len(c) for c in self.classes]
        if sizes and max(sizes) - min(sizes) > 1:
            out.append("equitability")
        return out


def _children(tree: ConflictGraph, root: int) -> tuple[list[int], list[list[int]]]:
    """Pre-order vertex list and child lists, without recursion."""
    parent = [-1] * tree.num_items
    kids: list[list[int]] = [[] for _ in range(tree.num_items)]
    order = [root]
    seen = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        for w in sorted(tree.neighbors(u)):
            if w not in seen:
                seen.add(w)
                parent[w] = u
                kids[u].append(w)
                order.append(w)
                stack.append(w)
    return order, kids


def _higher_prefix_ok(counts: list[int], x: int) -> bool:
    top = max(counts)
    if x == 0:
        return all(c == top for c in counts)
    return all((counts[c] == top) == (c < x) for c in range(len(counts)))


def equitable_color_tree(tree: ConflictGraph, n: int, root: int = 0,
                         debug: bool = False) -> PartialColoring:
    """Maximal equitable ``n``-colouring with the root uncoloured or in a largest class.

    ``debug`` asserts the merge invariant (after each child, exactly the
    first ``x`` colours are of maximum size) and the root invariant at every
    vertex.
    """
    if n < 1:
        raise PreconditionError("n must be positive")
    m = tree.num_items
    if m == 0:
        return PartialColoring(tuple(frozenset() for _ in range(n)))
    if not tree.is_tree():
        raise WrongSolver("conflict graph is not a tree")
    if not 0 <= root < m:
        raise PreconditionError(f"root {root} is not a vertex")
    order, kids = _children(tree, root)
    color = [-1] * m
    members: list[list[int]] = [[] for _ in range(m)]
    counts: list[list[int]] = [[] for _ in range(m)]

    for r in reversed(order):
        if not kids[r]:
            color[r] = 0
            members[r] = [r]
            counts[r] = [1] + [0] * (n - 1)
            continue
        info = []
        for ch in kids[r]:
            cnt = counts[ch]
            ranked = sorted(range(n), key=lambda c: (-cnt[c], c))
            top = cnt[ranked[0]]
            singular = color[ch] == ranked[0] and (n == 1 or cnt[ranked[1]] < top)
            info.append((not singular, -len(members[ch]), ch, ranked, top))
        info.sort()
        total = [0] * n
        x = 0
        higher_of = {}
        for _, _, ch, ranked, top in info:
            cnt = counts[ch]
            relabel = [0] * n
            for q, c in enumerate(ranked):
                relabel[c] = (x + q) % n
            for v in members[ch]:
                if color[v] >= 0:
                    color[v] = relabel[color[v]]
            new_cnt = [0] * n
            for c in range(n):
                new_cnt[relabel[c]] = cnt[c]
            counts[ch] = new_cnt
            for c in range(n):
                total[c] += new_cnt[c]
            h = sum(1 for c in range(n) if cnt[c] == top)
            higher_of[ch] = [c for c in range(n) if new_cnt[c] == top]
            x = (x + h) % n
            if debug and not _higher_prefix_ok(total, x):
                raise AssertionError(f"merge at vertex {r}: colours 0..{x - 1} are not exactly the higher ones")
        singular_count = sum(1 for item in info if not item[0])
        if singular_count < n:
            last = n - 1
            for ch in kids[r]:
                if color[ch] != last:
                    continue
                alt = [c for c in higher_of[ch] if c != last]
                if not alt:
                    raise AssertionError(f"child {ch} of {r} holds colour {last} with no alternative")
                swap = alt[0]
                for v in members[ch]:
                    if color[v] == last:
                        color[v] = swap
                    elif color[v] == swap:
                        color[v] = last
            color[r] = last
            total[last] += 1
        acc = [r]
        for ch in kids[r]:
            acc.extend(members[ch])
            members[ch] = []
        members[r] = acc
        counts[r] = total
        if debug and color[r] >= 0 and total[color[r]] != max(total):
            raise AssertionError(f"root {r} is coloured with a non-higher colour")

    classes = [set() for _ in range(n)]
    for v in range(m):
        if color[v] >= 0:
            classes[color[v]].add(v)
    out = PartialColoring(tuple(frozenset(c) for c in classes))
    if debug:
        bad = out.violations(tree)
        if bad:
            raise AssertionError(f"colouring breaks {bad}")
    return out


def allocation_from_equitable(instance: Instance, coloring: PartialColoring) -> Allocation:
    """Bundles are the colour classes; rejects colourings that break an invariant."""
    if coloring.n != instance.num_agents:
        raise ValidationError(f"{coloring.n} colours for {instance.num_agents} agents")
    bad = coloring.violations(instance.graph)
    if bad:
        raise ValidationError(f"colouring breaks {', '.join(bad)}")
    return Allocation(coloring.classes)


def solve_tree_uniform(instance: Instance, root: int = 0) -> Allocation:
    """Maximal EF1 allocation for uniform valuations on a tree."""
    if not isinstance(instance.valuations, UniformValuation):
        raise UnsupportedValuation("the tree construction needs uniform valuations")
    coloring = equitable_color_tree(instance.graph, instance.num_agents, root)
    alloc = allocation_from_equitable(instance, coloring)
    if not checkers.is_ef1(instance, alloc) or not checkers.is_maximal(instance, alloc):
        raise AssertionError("equitable colouring did not give a maximal EF1 allocation")
    return alloc
