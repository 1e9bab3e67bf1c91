"""Compare the compiled and pure-Python kernels on fixed workloads.

    python benchmarks/bench_kernels.py [--repeat 3]

Each workload runs once per backend and the outputs are compared, so a
speed-up is only reported for identical results.
"""

import argparse
import time

from conflictfair import instances, kernels
from conflictfair.core import ConflictGraph
from conflictfair.path_ef11 import build_clique_cycle


def _enum_workload(name, n=None, mode=kernels.MAXIMAL):
    inst = instances.builtin(name, n)
    adj = inst.graph.adjacency

    def run(backend):
        return list(kernels.enumerate_allocations(inst.num_items, inst.num_agents, adj, mode,
                                                  backend=backend))
    return run


def _gnp_workload(m, n, seed):
    inst = instances.generate("gnp", {"m": m, "p": 0.35}, seed)
    adj = inst.graph.adjacency

    def run(backend):
        return sum(1 for _ in kernels.enumerate_allocations(m, n, adj, kernels.MAXIMAL,
                                                            backend=backend))
    return run


def _color_workload(m, n, seed):
    rng = instances.SeededRng(seed, "bench")
    vals = [rng.randint(-5, 9) for _ in range(m)]
    inst = instances.Instance(ConflictGraph.path(m),
                              instances.AdditiveValuation.identical_values(vals, n))
    h = build_clique_cycle(inst)
    nbrs = [sorted(s) for s in h.neighbours()]

    def run(backend):
        return kernels.color_graph(h.num_vertices, nbrs, n, h.cycle, backend=backend)
    return run


WORKLOADS = {
    "enumerate thm7_k3n(6) maximal": _enum_workload("thm7_k3n", 6),
    "enumerate thm6_k33 maximal": _enum_workload("thm6_k33"),
    "enumerate gnp m=20 n=2 maximal": _gnp_workload(20, 2, 1),
    "enumerate gnp m=14 n=3 maximal": _gnp_workload(14, 3, 2),
    "colour path H m=24 n=4": _color_workload(24, 4, 3),
    "colour path H m=60 n=5": _color_workload(60, 5, 4),
}


def best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.BACKEND != "cython":
        print("compiled kernels not built; only the Python backend is available")
    print(f"{'workload':36} {'python s':>10} {'cython s':>10} {'speed-up':>9}")
    for name, fn in WORKLOADS.items():
        tp, out_p = best_time(lambda: fn("python"), args.repeat)
        if kernels.BACKEND != "cython":
            print(f"{name:36} {tp:10.4f} {'-':>10} {'-':>9}")
            continue
        tc, out_c = best_time(lambda: fn("cython"), args.repeat)
        if out_c != out_p:
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:36} {tp:10.4f} {tc:10.4f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
