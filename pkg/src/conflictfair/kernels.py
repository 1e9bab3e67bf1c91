"""Select the compiled kernels when available, else the pure-Python twins.

Set ``CONFLICTFAIR_PURE_PYTHON=1`` to force the fallback.  ``BACKEND`` names
the module that was loaded.
"""

import os

from . import _kernels_py
from ._kernels_py import COMPLETE, FEASIBLE, MAXIMAL, NodeBudgetExceeded

_ext = None
if os.environ.get("CONFLICTFAIR_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _ckernels as _ext
    except ImportError:  # extension not built
        _ext = None

BACKEND = "cython" if _ext is not None else "python"


def enumerate_allocations(m, n, adj, mode, symmetric=False, max_nodes=10**8, stats=None, backend=None):
    stats = [0] if stats is None else stats
    impl = _pick(backend, m <= 64)
    return impl.enumerate_allocations(m, n, list(adj), mode, symmetric, max_nodes, stats)


def color_graph(nv, nbrs, k, order=None, pinned=None, max_nodes=10**8, stats=None, backend=None):
    stats = [0] if stats is None else stats
    order = list(range(nv)) if order is None else list(order)
    pinned = [-1] * nv if pinned is None else list(pinned)
    impl = _pick(backend, k <= 30)
    return impl.color_graph(nv, [list(x) for x in nbrs], k, order, pinned, max_nodes, stats)


def _pick(backend, compiled_ok):
    if backend == "python" or _ext is None or not compiled_ok:
        if backend == "cython" and _ext is None:
            raise RuntimeError("compiled kernels are not built")
        return _kernels_py
    return _ext


__all__ = ["BACKEND", "COMPLETE", "FEASIBLE", "MAXIMAL", "NodeBudgetExceeded",
           "color_graph", "enumerate_allocations"]
