"""Pure-Python hot loops.  ``_ckernels.pyx`` mirrors this module line for line.

Both implementations are selected through :mod:`conflictfair.kernels`; keep
their signatures and iteration order identical so results do not depend on
which one is loaded.
"""

FEASIBLE = 0
MAXIMAL = 1
COMPLETE = 2


class NodeBudgetExceeded(Exception):
    pass


def _closers(m, adj):
    # item u can be judged for maximality once every neighbour is decided
    close = [[] for _ in range(m)]
    for u in range(m):
        last = u
        a = adj[u]
        if a:
            last = max(last, a.bit_length() - 1)
        close[last].append(u)
    return close


def enumerate_allocations(m, n, adj, mode, symmetric, max_nodes, stats):
    """Yield every feasible allocation (tuple of ``n`` bundle masks).

    ``mode`` filters to all feasible (0), maximal (1) or complete (2)
    allocations.  With ``symmetric`` only allocations whose non-empty bundles
    open in agent order are produced (one representative per agent
    permutation).  ``stats[0]`` receives the number of search nodes.
    Raises :class:`NodeBudgetExceeded` past ``max_nodes``.
    """
    bundles = [0] * n
    if m == 0:
        stats[0] = 0
        yield tuple(bundles)
        return
    close = _closers(m, adj)
    assign = [n] * m
    choice = [0] * m
    used = [0] * (m + 1)
    last_choice = n if mode != COMPLETE else n - 1
    nodes = 0
    k = 0
    while k >= 0:
        c = choice[k]
        if c > last_choice:
            k -= 1
            if k >= 0:
                a = assign[k]
                if a < n:
                    bundles[a] &= ~(1 << k)
                assign[k] = n
            continue
        choice[k] = c + 1
        bit = 1 << k
        if c < n:
            if symmetric and c > used[k]:
                choice[k] = n  # higher agents are unopened too
                continue
            if bundles[c] & adj[k]:
                continue
            bundles[c] |= bit
            used[k + 1] = used[k] if c < used[k] else c + 1
        else:
            used[k + 1] = used[k]
        assign[k] = c
        nodes += 1
        if nodes > max_nodes:
            stats[0] = nodes
            raise NodeBudgetExceeded(nodes)
        ok = True
        if mode == MAXIMAL:
            for u in close[k]:
                if assign[u] == n:
                    au = adj[u]
                    for a in range(n):
                        if not bundles[a] & au:
                            ok = False
                            break
                    if not ok:
                        break
        if ok and k == m - 1:
            stats[0] = nodes
            yield tuple(bundles)
        if not ok or k == m - 1:
            if c < n:
                bundles[c] &= ~bit
            assign[k] = n
            continue
        k += 1
        choice[k] = 0
    stats[0] = nodes


def color_graph(nv, nbrs, k, order, pinned, max_nodes, stats):
    """Proper ``k``-colouring by backtracking with forward checking.

    ``nbrs`` is a list of neighbour lists, ``order`` ranks vertices for tie
    breaking (lower first), ``pinned`` holds a fixed colour or -1 per vertex.
    Variable choice is minimum remaining values, ties by ``order``.
    Returns a colour list or ``None``; raises :class:`NodeBudgetExceeded`.
    """
    full = (1 << k) - 1
    dom = [full] * nv
    color = [-1] * nv
    rank = [0] * nv
    for pos, v in enumerate(order):
        rank[v] = pos
    trail = []
    counter = [0]

    def assign(v, c):
        # returns False on a wipe-out; removals are pushed to the trail
        color[v] = c
        bit = 1 << c
        for u in nbrs[v]:
            if color[u] == -1 and dom[u] & bit:
                dom[u] &= ~bit
                trail.append((u, bit))
                if not dom[u]:
                    return False
            elif color[u] == c:
                return False
        return True

    def undo(mark, v):
        while len(trail) > mark:
            u, bit = trail.pop()
            dom[u] |= bit
        color[v] = -1

    for v in range(nv):
        c = pinned[v]
        if c >= 0:
            if not dom[v] >> c & 1 or not assign(v, c):
                stats[0] = 0
                return None

    def pick():
        best = -1
        best_key = None
        for v in range(nv):
            if color[v] == -1:
                key = (bin(dom[v]).count("1"), rank[v])
                if best_key is None or key < best_key:
                    best, best_key = v, key
        return best

    def solve():
        v = pick()
        if v < 0:
            return True
        d = dom[v]
        c = 0
        while d:
            if d & 1:
                counter[0] += 1
                if counter[0] > max_nodes:
                    raise NodeBudgetExceeded(counter[0])
                mark = len(trail)
                if assign(v, c) and solve():
                    return True
                undo(mark, v)
            d >>= 1
            c += 1
        return False

    try:
        found = solve()
    finally:
        stats[0] = counter[0]
    return list(color) if found else None
