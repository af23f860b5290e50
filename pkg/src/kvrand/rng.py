"""Seedable uniform source with independent streams.

The generator is numpy's PCG64 (period 2**128) keyed by
``SeedSequence(seed, spawn_key=(stream,))``. Only the raw 64-bit output of
the bit generator is consumed, and the conversions below are fixed, so a
``(seed, stream)`` pair maps to the same numbers on every platform and
numpy release that keeps PCG64/SeedSequence stable.

- uniform: ``(raw >> 11) * 2**-53``, in [0, 1)
- index in [0, n): ``raw % n`` after rejecting ``raw >= 2**64 - (2**64 % n)``
"""
from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_TWO_M53 = 2.0 ** -53


class UniformSource:
    def __init__(self, seed: int, stream: int = 0):
        seed, stream = int(seed), int(stream)
        if not 0 <= seed <= _MASK64 or not 0 <= stream <= _MASK64:
            raise ValueError("seed and stream must be unsigned 64-bit integers")
        self.seed = seed
        self.stream = stream
        self._bits = np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,)))
        # Generator.random on PCG64 is exactly (raw >> 11) * 2**-53, just faster
        self._gen = np.random.Generator(self._bits)
        self.consumed = 0

    def __repr__(self):
        return f"UniformSource(seed={self.seed}, stream={self.stream}, consumed={self.consumed})"

    def raw(self, count: int) -> np.ndarray:
        self.consumed += int(count)
        return self._bits.random_raw(int(count))

    def uniforms(self, count: int) -> np.ndarray:
        self.consumed += int(count)
        return self._gen.random(int(count))

    def uniforms_from_raw(self, count: int) -> np.ndarray:
        """Same values as ``uniforms``, spelled out on the raw output."""
        return (self.raw(count) >> np.uint64(11)).astype(np.float64) * _TWO_M53

    def next_uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def indices(self, n: int, count: int) -> np.ndarray:
        """``count`` unbiased integers in ``[0, n)``."""
        n = int(n)
        if not 1 <= n <= 1 << 64:
            raise ValueError("n must be in [1, 2**64]")
        count = int(count)
        if n == 1:
            self.raw(count)
            return np.zeros(count, dtype=np.uint64)
        residue = (1 << 64) % n
        out = self.raw(count)
        if residue:
            limit = np.uint64((1 << 64) - residue)
            bad = np.flatnonzero(out >= limit)
            while bad.size:
                out[bad] = self.raw(bad.size)
                bad = bad[out[bad] >= limit]
        if n == 1 << 64:
            return out
        return out % np.uint64(n)

    def next_index(self, n: int) -> int:
        """One unbiased integer in ``[1, n]`` (1-based, unlike ``indices``)."""
        return int(self.indices(n, 1)[0]) + 1

    def bounded_sequence(self, bounds: np.ndarray) -> np.ndarray:
        """One unbiased integer in ``[0, bounds[i])`` per entry (bounds >= 1)."""
        bounds = np.asarray(bounds, dtype=np.uint64)
        out = self.raw(bounds.size)
        # 2**64 mod b, computed without leaving uint64
        residue = (np.uint64(0) - bounds) % bounds
        limit = np.uint64(0) - residue
        bad = np.flatnonzero((residue != 0) & (out >= limit))
        while bad.size:
            out[bad] = self.raw(bad.size)
            bad = bad[out[bad] >= limit[bad]]
        return out % bounds
