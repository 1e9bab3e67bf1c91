# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the loops in ``_kernels_py``.

Masks are ``uint64``; callers route instances with more than 64 items to the
pure-Python module instead.
"""

from libc.stdlib cimport malloc, free
from libc.stdint cimport uint64_t, int64_t

from ._kernels_py import NodeBudgetExceeded

cdef enum:
    FEASIBLE = 0
    MAXIMAL = 1
    COMPLETE = 2

MAX_ITEMS = 64


def enumerate_allocations(int m, int n, adj_in, int mode, bint symmetric, long long max_nodes, stats):
    cdef uint64_t* adj
    cdef uint64_t* bundles
    cdef int* assign
    cdef int* choice
    cdef int* used
    cdef int* close_start
    cdef int* close_items
    cdef int k, c, a, u, last, j, last_choice
    cdef uint64_t bit, au
    cdef long long nodes = 0
    cdef bint ok

    if m > 64:
        raise ValueError("compiled enumerator handles at most 64 items")
    if m == 0:
        stats[0] = 0
        yield tuple([0] * n)
        return

    adj = <uint64_t*> malloc(m * sizeof(uint64_t))
    bundles = <uint64_t*> malloc(n * sizeof(uint64_t))
    assign = <int*> malloc(m * sizeof(int))
    choice = <int*> malloc(m * sizeof(int))
    used = <int*> malloc((m + 1) * sizeof(int))
    close_start = <int*> malloc((m + 1) * sizeof(int))
    close_items = <int*> malloc(m * sizeof(int))
    try:
        for u in range(m):
            adj[u] = <uint64_t> adj_in[u]
        for a in range(n):
            bundles[a] = 0
        # bucket items by the index at which their maximality becomes decidable
        for u in range(m + 1):
            close_start[u] = 0
        for u in range(m):
            last = u
            for j in range(u + 1, m):
                if (adj[u] >> j) & 1:
                    last = j
            close_start[last + 1] += 1
        for u in range(m):
            close_start[u + 1] += close_start[u]
        for u in range(m):
            choice[u] = close_start[u]
        for u in range(m):
            last = u
            for j in range(u + 1, m):
                if (adj[u] >> j) & 1:
                    last = j
            close_items[choice[last]] = u
            choice[last] += 1
        for u in range(m):
            assign[u] = n
            choice[u] = 0
        used[0] = 0
        last_choice = n if mode != COMPLETE else n - 1

        k = 0
        while k >= 0:
            c = choice[k]
            if c > last_choice:
                k -= 1
                if k >= 0:
                    a = assign[k]
                    if a < n:
                        bundles[a] &= ~((<uint64_t> 1) << k)
                    assign[k] = n
                continue
            choice[k] = c + 1
            bit = (<uint64_t> 1) << k
            if c < n:
                if symmetric and c > used[k]:
                    choice[k] = n
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
                for j in range(close_start[k], close_start[k + 1]):
                    u = close_items[j]
                    if assign[u] == n:
                        au = adj[u]
                        for a in range(n):
                            if not (bundles[a] & au):
                                ok = False
                                break
                        if not ok:
                            break
            if ok and k == m - 1:
                stats[0] = nodes
                yield tuple([bundles[a] for a in range(n)])
            if not ok or k == m - 1:
                if c < n:
                    bundles[c] &= ~bit
                assign[k] = n
                continue
            k += 1
            choice[k] = 0
        stats[0] = nodes
    finally:
        free(adj)
        free(bundles)
        free(assign)
        free(choice)
        free(used)
        free(close_start)
        free(close_items)


cdef struct ColorCtx:
    int nv
    int k
    int* nb_start
    int* nb
    int* dom
    int* color
    int* rank
    int* trail_v
    int* trail_bit
    int trail_len
    long long nodes
    long long max_nodes
    bint over_budget


cdef inline int popcount(int x):
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


cdef bint assign_color(ColorCtx* ctx, int v, int c):
    cdef int bit = 1 << c
    cdef int j, u
    ctx.color[v] = c
    for j in range(ctx.nb_start[v], ctx.nb_start[v + 1]):
        u = ctx.nb[j]
        if ctx.color[u] == -1 and (ctx.dom[u] & bit):
            ctx.dom[u] &= ~bit
            ctx.trail_v[ctx.trail_len] = u
            ctx.trail_bit[ctx.trail_len] = bit
            ctx.trail_len += 1
            if not ctx.dom[u]:
                return False
        elif ctx.color[u] == c:
            return False
    return True


cdef void undo_to(ColorCtx* ctx, int mark, int v):
    while ctx.trail_len > mark:
        ctx.trail_len -= 1
        ctx.dom[ctx.trail_v[ctx.trail_len]] |= ctx.trail_bit[ctx.trail_len]
    ctx.color[v] = -1


cdef bint solve(ColorCtx* ctx):
    cdef int v = -1, u, size, best_size = 1 << 30, best_rank = 1 << 30
    cdef int d, c, mark
    for u in range(ctx.nv):
        if ctx.color[u] == -1:
            size = popcount(ctx.dom[u])
            if size < best_size or (size == best_size and ctx.rank[u] < best_rank):
                v = u
                best_size = size
                best_rank = ctx.rank[u]
    if v < 0:
        return True
    d = ctx.dom[v]
    c = 0
    while d:
        if d & 1:
            ctx.nodes += 1
            if ctx.nodes > ctx.max_nodes:
                ctx.over_budget = True
                return False
            mark = ctx.trail_len
            if assign_color(ctx, v, c) and solve(ctx):
                return True
            if ctx.over_budget:
                return False
            undo_to(ctx, mark, v)
        d >>= 1
        c += 1
    return False


def color_graph(int nv, nbrs, int k, order, pinned, long long max_nodes, stats):
    cdef ColorCtx ctx
    cdef int v, j, total = 0, c
    cdef bint found = False
    if k > 30:
        raise ValueError("compiled colouring handles at most 30 colours")
    for v in range(nv):
        total += len(nbrs[v])
    ctx.nv = nv
    ctx.k = k
    ctx.nb_start = <int*> malloc((nv + 1) * sizeof(int))
    ctx.nb = <int*> malloc((total + 1) * sizeof(int))
    ctx.dom = <int*> malloc((nv + 1) * sizeof(int))
    ctx.color = <int*> malloc((nv + 1) * sizeof(int))
    ctx.rank = <int*> malloc((nv + 1) * sizeof(int))
    # every removal is one (vertex, colour) pair, so nv*k bounds the trail
    ctx.trail_v = <int*> malloc((nv * k + 1) * sizeof(int))
    ctx.trail_bit = <int*> malloc((nv * k + 1) * sizeof(int))
    ctx.trail_len = 0
    ctx.nodes = 0
    ctx.max_nodes = max_nodes
    ctx.over_budget = False
    try:
        j = 0
        for v in range(nv):
            ctx.nb_start[v] = j
            for u in nbrs[v]:
                ctx.nb[j] = u
                j += 1
            ctx.dom[v] = (1 << k) - 1
            ctx.color[v] = -1
        ctx.nb_start[nv] = j
        for j, v in enumerate(order):
            ctx.rank[v] = j
        for v in range(nv):
            c = pinned[v]
            if c >= 0:
                if not ((ctx.dom[v] >> c) & 1) or not assign_color(&ctx, v, c):
                    stats[0] = 0
                    return None
        found = solve(&ctx)
        stats[0] = ctx.nodes
        if ctx.over_budget:
            raise NodeBudgetExceeded(ctx.nodes)
        if not found:
            return None
        return [ctx.color[v] for v in range(nv)]
    finally:
        free(ctx.nb_start)
        free(ctx.nb)
        free(ctx.dom)
        free(ctx.color)
        free(ctx.rank)
        free(ctx.trail_v)
        free(ctx.trail_bit)
