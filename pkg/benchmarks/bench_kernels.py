"""Compare compiled and pure-Python graphlet kernels on random graphs.

    python3 benchmarks/bench_kernels.py --n 2000 --avg-degree 12 --repeat 3
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from dps4s import _kernels_py
from dps4s.workloads import Graph

try:
    from dps4s import _kernels as _compiled
except ImportError:
    _compiled = None

PATTERNS = ("triangles", "path2", "path3", "rectangles")


def random_graph(n: int, avg_degree: float, seed: int) -> Graph:
    rng = np.random.default_rng(seed)
    m = int(n * avg_degree / 2)
    src = rng.integers(0, n, size=m)
    dst = rng.integers(0, n, size=m)
    keep = src != dst
    return Graph.from_edges(np.stack([src[keep], dst[keep]], axis=1), n_vertices=n)


def best_of(fn, args, repeat: int) -> tuple[float, np.ndarray]:
    best, out = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--avg-degree", type=float, default=10.0)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)

    graph = random_graph(args.n, args.avg_degree, args.seed)
    adj = graph.adjacency()
    print(f"n={graph.n_vertices} edges={len(graph.edges)} max_degree={graph.max_degree()}")
    if _compiled is None:
        print("compiled extension not built; reporting pure-Python timings only")
    print(f"{'pattern':<12}{'count':>12}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    for name in PATTERNS:
        t_py, out_py = best_of(getattr(_kernels_py, name), adj, args.repeat)
        if _compiled is None:
            print(f"{name:<12}{len(out_py):>12}{t_py:>12.4f}{'-':>12}{'-':>10}")
            continue
        t_cy, out_cy = best_of(getattr(_compiled, name), adj, args.repeat)
        if not np.array_equal(out_py, out_cy):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:<12}{len(out_py):>12}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
