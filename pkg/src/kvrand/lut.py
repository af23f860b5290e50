"""Pre-generated sample tables built by sweeping ordinate levels of a density.

For every level ``y_d`` the density is inverted; the roots split the domain
into intervals that alternate between lying above and below the level. The
intervals above are filled with points ``dx_r`` apart (both endpoints
included), so the table's point density at ``x`` grows with the number of
levels below ``f(x)``. Drawing is then a uniform index lookup.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import EmptyTable, NumericError
from .inversion import DEFAULT_TOL, FunctionTable, collect_brackets, find_root_clusters, refine_brackets
from .optimal import level_values
from .rng import UniformSource
from .sampler import SampleBatch


@dataclass(frozen=True)
class LevelPlan:
    n_d: int
    dx_r: float
    table: FunctionTable

    def __post_init__(self):
        if self.n_d < 1:
            raise ValueError("n_d must be at least 1")
        if not self.dx_r > 0:
            raise ValueError("dx_r must be positive")

    def levels(self) -> np.ndarray:
        t = self.table
        if self.n_d == 1:
            return np.array([0.5 * (t.y_min + t.y_max)])
        return level_values(t.y_min, t.y_max, self.n_d)


@dataclass(frozen=True)
class SampleTable:
    samples: np.ndarray
    per_level_counts: np.ndarray

    def __len__(self) -> int:
        return int(self.samples.size)


def select_intervals(boundaries, first_above: bool) -> tuple[np.ndarray, np.ndarray]:
    """Intervals of ``boundaries`` lying above the level.

    ``first_above`` says whether the first interval is above; the rest
    alternate.
    """
    b = np.asarray(boundaries, dtype=np.float64)
    start = 0 if first_above else 1
    return b[start:-1:2], b[start + 1::2]


def level_points(boundaries, first_above: bool, dx_r: float, backend: str | None = None) -> np.ndarray:
    lo, hi = select_intervals(boundaries, first_above)
    return kernels.get("fill_intervals", backend)(lo, hi, float(dx_r))


def _first_above(table: FunctionTable, level: float, roots: np.ndarray) -> bool:
    """Is the first interval above ``level``?

    Decided by ``y(1)`` against the level. When ``y(1)`` equals the level
    the first grid value that differs decides, and the parity is counted
    from the interval that grid point falls in.
    """
    y = table.y_vals
    if y[0] != level:
        return bool(y[0] > level)
    off = np.flatnonzero(y != level)
    if off.size == 0:
        return False
    p = int(off[0])
    interval = int(np.searchsorted(roots, table.x_grid[p], side="left"))
    above = bool(y[p] > level)
    return above if interval % 2 == 0 else not above


def level_roots(table: FunctionTable, levels, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """Sorted roots per level, clusters next to extrema removed."""
    levels = np.asarray(levels, dtype=np.float64)
    exacts, pend_lo, pend_hi, pend_y, pend_slot = [], [], [], [], []
    for i, level in enumerate(levels):
        exact, lo, hi = collect_brackets(table, find_root_clusters(table, level))
        exacts.append(exact)
        pend_lo.append(lo)
        pend_hi.append(hi)
        pend_y.append(np.full(lo.size, level))
        pend_slot.append(np.full(lo.size, i))
    lo = np.concatenate(pend_lo)
    out = [e for e in exacts]
    if lo.size:
        slots = np.concatenate(pend_slot)
        roots = refine_brackets(table.func, lo, np.concatenate(pend_hi), np.concatenate(pend_y), tol)
        bounds = np.searchsorted(slots, np.arange(levels.size + 1))
        for i in range(levels.size):
            out[i] = np.concatenate((out[i], roots[bounds[i]:bounds[i + 1]]))
    return [np.sort(r) for r in out]


def build_sample_table(plan: LevelPlan, float32: bool = False, backend: str | None = None) -> SampleTable:
    t = plan.table
    levels = plan.levels()
    all_lo, all_hi, per_level = [], [], []
    for level, roots in zip(levels, level_roots(t, levels)):
        boundaries = np.concatenate(([t.x_min], roots, [t.x_max]))
        lo, hi = select_intervals(boundaries, _first_above(t, level, roots))
        all_lo.append(lo)
        all_hi.append(hi)
        per_level.append(lo.size)
    lo = np.concatenate(all_lo)
    hi = np.concatenate(all_hi)
    if np.any(hi < lo):
        raise NumericError("roots out of order while partitioning the domain")
    counts = kernels.get("fill_counts", backend)(lo, hi, float(plan.dx_r))
    level_of = np.repeat(np.arange(levels.size), per_level)
    per_level_counts = np.bincount(level_of, weights=counts, minlength=levels.size).astype(np.int64)
    samples = kernels.get("fill_intervals", backend)(lo, hi, float(plan.dx_r))
    if samples.size == 0:
        raise EmptyTable("no level produced any sample")
    if float32:
        samples = samples.astype(np.float32)
    samples.setflags(write=False)
    return SampleTable(samples, per_level_counts)


def draw_from_table(t: SampleTable, rng: UniformSource, count: int) -> SampleBatch:
    if len(t) == 0:
        raise EmptyTable("cannot draw from an empty table")
    idx = rng.indices(len(t), int(count))
    return SampleBatch(np.asarray(t.samples[idx], dtype=np.float64), rng.seed, rng.stream, int(count))


def permutation_indices(n: int, rng: UniformSource) -> np.ndarray:
    """Swap partners for Fisher-Yates: entry t is uniform in ``[0, n - 1 - t]``."""
    if n < 2:
        return np.empty(0, dtype=np.int64)
    return rng.bounded_sequence(np.arange(n, 1, -1, dtype=np.uint64)).astype(np.int64)


def shuffle_table(t: SampleTable, rng: UniformSource, backend: str | None = None) -> SampleTable:
    values = np.array(t.samples)
    kernels.get("shuffle", backend)(values, permutation_indices(values.size, rng))
    values.setflags(write=False)
    return SampleTable(values, t.per_level_counts)


class AliasTable:
    """Vose's alias method for O(1) draws from a weighted discrete distribution."""

    def __init__(self, weights):
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-d array")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        total = w.sum()
        if not total > 0:
            raise ValueError("weights sum to zero")
        n = w.size
        p = w * (n / total)
        prob = np.ones(n)
        alias = np.arange(n)
        small = [i for i in range(n) if p[i] < 1.0]
        large = [i for i in range(n) if p[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = p[s]
            alias[s] = g
            p[g] = (p[g] + p[s]) - 1.0
            (small if p[g] < 1.0 else large).append(g)
        # leftovers are 1 up to rounding
        self.prob = prob
        self.alias = alias

    def __len__(self) -> int:
        return int(self.prob.size)

    def draw(self, rng: UniformSource, count: int) -> np.ndarray:
        i = rng.indices(len(self), count).astype(np.int64)
        u = rng.uniforms(count)
        return np.where(u < self.prob[i], i, self.alias[i])
