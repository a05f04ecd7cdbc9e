#!/usr/bin/env python3
"""Compare the numba kernels against the pure numpy/python fallbacks.

Runs the hot paths twice: once in the current process (numba when
installed) and once in a subprocess with KVVSTREAM_NO_NUMBA=1.  Workloads
are sized so the fallback finishes in reasonable time; the streaming
comparison uses the fix-b preset (16.7M edges).

Usage: python benchmarks/benchmark_kernels.py [--inner]
"""

import json
import os
import subprocess
import sys
import time

import numpy as np


def bench_hk(rng):
    from kvvstream.matching import BipartiteGraph, max_matching
    n = 20_000
    e = 60_000
    g = BipartiteGraph.from_edges(rng.integers(0, n, e),
                                  rng.integers(0, n, e), n, n)
    t0 = time.perf_counter()
    m = max_matching(g)
    return time.perf_counter() - t0, m.size


def bench_greedy(rng):
    from kvvstream import _kernels as kn
    e = 4_000_000
    u = rng.integers(0, 1_000_000, e)
    v = rng.integers(0, 1_000_000, e)
    mu = kn.make_bitset(1_000_000)
    mv = kn.make_bitset(1_000_000)
    keep = np.zeros(e, dtype=bool)
    t0 = time.perf_counter()
    cnt = kn.greedy_batch(u, v, mu, mv, keep)
    return time.perf_counter() - t0, int(cnt)


def bench_stream(rng):
    from kvvstream import harness as hn
    from kvvstream import _kernels as kn
    from kvvstream.fixtures import make_fixture
    inst = make_fixture("fix-b")
    # full budget: both paths then keep every edge, so the greedy matching
    # size is deterministic and must agree across modes
    budget = inst.stream_edge_count()
    t0 = time.perf_counter()
    if kn.HAVE_NUMBA:
        kept, m_alg, _sp, _ms = hn._stream_kernel_run_numba(inst, budget,
                                                            seed=5)
    else:
        kept, m_alg, _sp, _ms = hn._stream_batches_run(inst, "uniform",
                                                       budget, seed=5)
    return time.perf_counter() - t0, m_alg


BENCHES = {"hopcroft_karp": bench_hk, "greedy_batch": bench_greedy,
           "uniform_stream_fixb": bench_stream}


def run_all():
    from kvvstream import _kernels as kn
    out = {"numba": kn.HAVE_NUMBA}
    for name, fn in BENCHES.items():
        dt, result = fn(np.random.default_rng(0))
        # run hot kernels twice so compilation is not billed to numba
        if kn.HAVE_NUMBA:
            dt, result = fn(np.random.default_rng(0))
        out[name] = {"seconds": dt, "result": result}
    return out


def main():
    if "--inner" in sys.argv:
        print(json.dumps(run_all()))
        return
    here = run_all()
    env = dict(os.environ, KVVSTREAM_NO_NUMBA="1")
    proc = subprocess.run([sys.executable, __file__, "--inner"], env=env,
                          capture_output=True, text=True, check=True)
    there = json.loads(proc.stdout.strip().splitlines()[-1])
    mode_a = "numba" if here["numba"] else "fallback"
    print(f"{'kernel':<22} {mode_a:>12} {'fallback':>12} {'speedup':>9}")
    for name in BENCHES:
        a = here[name]["seconds"]
        b = there[name]["seconds"]
        if here[name]["result"] != there[name]["result"]:
            raise SystemExit(f"{name}: results differ between modes")
        print(f"{name:<22} {a:>11.3f}s {b:>11.3f}s {b / a:>8.1f}x")


if __name__ == "__main__":
    main()
