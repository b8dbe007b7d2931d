#!/usr/bin/env python3
"""Benchmark the compiled Euler walker against the pure-Python fallback.

Both backends consume identical draws and must produce bit-identical paths;
this script verifies that on the fly and reports per-replicate timings.

Usage: python benchmarks/bench_kernels.py [--reps 5]
"""

import argparse
import time

import numpy as np

import jumpest.simulate as sim
from jumpest import _pathkernel_py
from jumpest import model as mdl

try:
    from jumpest import _pathkernel
except ImportError:
    _pathkernel = None

CASES = [
    ("constant coefficients, n=10000 (exact steps)", mdl.compound_poisson_model(), 10_000, 20),
    ("bounded-sine diffusion, n=10000, substeps=20", mdl.bounded_sine_model(), 10_000, 20),
    ("modulated jumps, n=4000, substeps=20", mdl.modulated_model(k=2), 4_000, 20),
]


def time_backend(kernel, model, n, substeps, reps):
    sim.euler_walk = kernel.euler_walk
    sim.simulate_replicate(model, n, substeps, 1234, 0)  # warm caches
    paths = []
    t0 = time.perf_counter()
    for r in range(reps):
        paths.append(sim.simulate_replicate(model, n, substeps, 1234, r))
    return (time.perf_counter() - t0) / reps, paths


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=5)
    args = ap.parse_args()

    if _pathkernel is None:
        print("compiled kernel not built; run `pip install -e . --no-build-isolation` first")
        return 1

    original = sim.euler_walk
    print(f"{'case':50s} {'compiled':>12s} {'python':>12s} {'speedup':>9s}  identical")
    try:
        for label, model, n, substeps in CASES:
            tc, pc = time_backend(_pathkernel, model, n, substeps, args.reps)
            tp, pp = time_backend(_pathkernel_py, model, n, substeps, args.reps)
            same = all(
                np.array_equal(a.obs, b.obs) and np.array_equal(a.jumps, b.jumps)
                for a, b in zip(pc, pp)
            )
            print(f"{label:50s} {tc * 1e3:9.2f} ms {tp * 1e3:9.2f} ms {tp / tc:8.1f}x  {same}")
    finally:
        sim.euler_walk = original
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
