#!/usr/bin/env python3
"""Numba kernels vs the pure-numpy fallback.

Times each sampling mode and the LUT fill/shuffle kernels on both backends,
checks that both backends return identical arrays, and prints one
key=value line per (kernel, backend).

Usage:
    python benchmarks/bench_kernels.py [--count N] [--nd N] [--repeat R]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from kvrand import kernels
from kvrand.cdf import DistributionSpec, build_cdf
from kvrand.densities import airy_ai
from kvrand.inversion import tabulate
from kvrand.lut import LevelPlan, build_sample_table, permutation_indices
from kvrand.rng import UniformSource
from kvrand.sampler import invert_many, make_sampler


def best_of(fn, repeat):
    fn()  # warm up (jit compile)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=2_000_000)
    ap.add_argument("--nd", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = kernels.available_backends()
    if "numba" not in backends:
        print("note: numba disabled or missing, only the numpy backend is timed")

    table = build_cdf(DistributionSpec.builtin("normal", -1, 1, sigma=0.2))
    base = make_sampler(table, args.nd)
    y = UniformSource(1).uniforms(args.count)

    results = {}
    for mode in ("direct", "linear", "lagrange"):
        s = base.with_mode(mode)
        for b in backends:
            dt, out = best_of(lambda: invert_many(s, y, b), args.repeat)
            results[(mode, b)] = out
            print(f"kernel={mode} backend={b} count={args.count} elapsed={dt:.4g} rate={args.count / dt:.4g}")

    plan = LevelPlan(args.nd, 9 / 10000, tabulate(airy_ai, -8, 1, 65535))
    for b in backends:
        dt, out = best_of(lambda: build_sample_table(plan, backend=b), 1)
        results[("lut", b)] = out.samples
        print(f"kernel=lut_build backend={b} count={len(out)} elapsed={dt:.4g} rate={len(out) / dt:.4g}")

    n = min(args.count, 1_000_000)
    js = permutation_indices(n, UniformSource(2))
    for b in backends:
        dt, out = best_of(lambda: kernels.get("shuffle", b)(np.arange(n, dtype=np.float64), js), args.repeat)
        results[("shuffle", b)] = out
        print(f"kernel=shuffle backend={b} count={n} elapsed={dt:.4g} rate={n / dt:.4g}")

    if len(backends) == 2:
        for name in ("direct", "linear", "lagrange", "lut", "shuffle"):
            same = np.array_equal(results[(name, "numba")], results[(name, "numpy")])
            print(f"kernel={name} backends_identical={same}")


if __name__ == "__main__":
    main()
