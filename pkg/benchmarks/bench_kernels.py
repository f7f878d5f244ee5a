"""Time the hot kernels under both backends on identical inputs.

    python benchmarks/bench_kernels.py [--q 5] [--repeat 3]

The first numba call of each kernel includes JIT compilation (or a cache
load), so it is timed separately as "warmup".
"""

import argparse
import time

import numpy as np

from congrkit import _accel, quotients


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--q", type=int, default=5, help="modulus for SL_3(Z/q)")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if _accel.HAS_NUMBA else [])
    rows = []
    for name in backends:
        _accel.set_backend(name)
        t0 = time.perf_counter()
        G = quotients.sl_elementary(3, args.q)
        graph = G.cayley_graph()
        _accel.average(np.ones(G.size), graph.perms)
        warm = time.perf_counter() - t0

        enum = best_of(lambda: quotients.sl_elementary(3, args.q), args.repeat)
        cay = best_of(G.cayley_graph, args.repeat)
        x = np.random.default_rng(0).standard_normal(G.size)
        mv = best_of(lambda: _accel.average(x, graph.perms), max(args.repeat, 10))
        rows.append((name, G.size, warm, enum, cay, mv))

    print(f"{'backend':8s} {'|G|':>8s} {'warmup':>8s} {'enumerate':>10s} {'cayley':>8s} {'matvec':>9s}")
    for name, n, warm, enum, cay, mv in rows:
        print(f"{name:8s} {n:8d} {warm:8.3f} {enum:10.3f} {cay:8.3f} {mv * 1e3:7.2f}ms")
    if len(rows) == 2:
        base, fast = rows
        print(f"speedup  enumerate x{base[3] / fast[3]:.2f}  cayley x{base[4] / fast[4]:.2f}  "
              f"matvec x{base[5] / fast[5]:.2f}")


if __name__ == "__main__":
    main()
