"""Goodness-of-fit helpers: histograms, Kolmogorov-Smirnov, chi-square."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .errors import BadEdges, EmptySample, ZeroExpected


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    total: int

    @property
    def out_of_range(self) -> int:
        return int(self.total - self.counts.sum())

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])


def histogram(samples, edges) -> Histogram:
    """Bins ``[e_i, e_{i+1})``, the last one closed."""
    e = np.asarray(edges, dtype=np.float64)
    if e.ndim != 1 or e.size < 2 or np.any(np.diff(e) <= 0) or not np.all(np.isfinite(e)):
        raise BadEdges("edges must be finite and strictly ascending, at least two of them")
    s = np.asarray(samples, dtype=np.float64).ravel()
    counts, _ = np.histogram(s, bins=e)
    return Histogram(e, counts.astype(np.int64), int(s.size))


def kolmogorov_sf(x: float, terms: int = 100) -> float:
    """P(K > x) for the Kolmogorov distribution, 2 sum (-1)^(k-1) exp(-2 k^2 x^2)."""
    if x <= 0:
        return 1.0
    if x < 0.2:
        # the alternating series converges slowly here and the value is 1 to double precision
        return 1.0
    k = np.arange(1, terms + 1)
    s = 2.0 * np.sum((-1.0) ** (k - 1) * np.exp(-2.0 * k * k * x * x))
    return float(min(max(s, 0.0), 1.0))


def ks_statistic(samples, cdf: Callable) -> tuple[float, float]:
    """Two-sided one-sample KS distance and its asymptotic p-value."""
    s = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    n = s.size
    if n == 0:
        raise EmptySample("KS test needs at least one sample")
    f = np.asarray(cdf(s), dtype=np.float64)
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
    sq = np.sqrt(n)
    # small-sample correction to the asymptotic argument
    return d, kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)


def ks_two_sample(a, b) -> tuple[float, float]:
    a = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(b, dtype=np.float64).ravel())
    if a.size == 0 or b.size == 0:
        raise EmptySample("KS test needs two nonempty samples")
    grid = np.concatenate((a, b))
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    d = float(np.max(np.abs(fa - fb)))
    ne = a.size * b.size / (a.size + b.size)
    sq = np.sqrt(ne)
    return d, kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)


def chi_square(counts, expected) -> tuple[float, float]:
    """Pearson statistic with B - 1 degrees of freedom."""
    o = np.asarray(counts, dtype=np.float64).ravel()
    e = np.asarray(expected, dtype=np.float64).ravel()
    if o.shape != e.shape:
        raise ValueError("counts and expected differ in length")
    if np.any(e <= 0):
        raise ZeroExpected("every expected count must be positive")
    chi2 = float(np.sum((o - e) ** 2 / e))
    dof = o.size - 1
    if dof < 1:
        return chi2, 1.0
    return chi2, float(special.gammaincc(0.5 * dof, 0.5 * chi2))


def pool_bins(counts, expected, min_expected: float = 5.0) -> tuple[np.ndarray, np.ndarray]:
    """Merge adjacent bins left to right until each expected count reaches ``min_expected``.

    A short remainder at the right end joins the last pooled bin.
    """
    o = np.asarray(counts, dtype=np.float64).ravel()
    e = np.asarray(expected, dtype=np.float64).ravel()
    po, pe = [], []
    acc_o = acc_e = 0.0
    for a, b in zip(o, e):
        acc_o += a
        acc_e += b
        if acc_e >= min_expected:
            po.append(acc_o)
            pe.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if pe:
            po[-1] += acc_o
            pe[-1] += acc_e
        else:
            po.append(acc_o)
            pe.append(acc_e)
    return np.array(po), np.array(pe)


def expected_from_density(density: Callable, edges, total: int, points_per_bin: int = 64) -> np.ndarray:
    """Expected bin counts for ``total`` draws from an unnormalized density (Simpson per bin)."""
    e = np.asarray(edges, dtype=np.float64)
    m = points_per_bin + (points_per_bin % 2)
    t = np.linspace(0.0, 1.0, m + 1)
    x = e[:-1, None] + (e[1:] - e[:-1])[:, None] * t[None, :]
    w = np.ones(m + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    mass = (np.asarray(density(x), dtype=np.float64) @ w) * (e[1:] - e[:-1]) / (3.0 * m)
    return total * mass / mass.sum()
