"""Inverse transform sampling on an optimal k-vector grid built over a CDF.

Three modes share one grid:

- ``linear``: bracket the root through the k-vector, interpolate linearly
- ``direct``: take the bracket straight from the inverted k-vector line
- ``lagrange``: interpolate through the ``n_e`` nodes nearest in ordinate

Linear and direct use the same interpolation formula, so on the same grid
and uniforms they agree bit for bit.

Zero-density plateaus are removed from the CDF before the grid is built.
The grid then lives in *compressed* coordinates (every excised interval
squeezed out), which keeps the underlying table uniformly spaced; outputs
are mapped back before they are returned.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .cdf import CumulativeTable, excise_plateaus
from .errors import DegenerateBracket, NotMonotone, OutOfRange
from .inversion import table_from_arrays
from .optimal import OptimalGrid, build_optimal_grid
from .rng import UniformSource

# draws are processed in chunks to bound temporary memory
CHUNK = 1 << 20


class Mode(str, enum.Enum):
    LINEAR = "linear"
    DIRECT = "direct"
    LAGRANGE = "lagrange"


@dataclass(frozen=True)
class SampleBatch:
    values: np.ndarray
    seed: int
    stream: int
    count: int


@dataclass(frozen=True)
class Sampler:
    grid: OptimalGrid
    mode: Mode
    n_e: int
    table: CumulativeTable = field(repr=False)
    # excised intervals as (start in compressed coords, width)
    gap_starts: np.ndarray = field(repr=False)
    gap_widths: np.ndarray = field(repr=False)

    @property
    def y_min(self) -> float:
        return self.grid.y_min

    @property
    def y_max(self) -> float:
        return self.grid.y_max

    @property
    def excised(self) -> tuple:
        return self.table.excised

    def with_mode(self, mode, n_e: int = 5) -> "Sampler":
        """Same grid, different interpolation mode."""
        mode = Mode(mode)
        n_e = _check_n_e(mode, n_e, self.grid.n)
        return Sampler(self.grid, mode, n_e, self.table, self.gap_starts, self.gap_widths)


def _check_n_e(mode: Mode, n_e: int, n_nodes: int) -> int:
    if mode is not Mode.LAGRANGE:
        return 2
    n_e = int(n_e)
    if n_e < 2:
        raise ValueError("lagrange mode needs n_e >= 2")
    if n_e > n_nodes:
        raise ValueError(f"n_e={n_e} exceeds the {n_nodes} grid nodes")
    return n_e


def _gaps(excised) -> tuple[np.ndarray, np.ndarray]:
    if not excised:
        return np.empty(0), np.empty(0)
    lo = np.array([a for a, _ in excised], dtype=np.float64)
    widths = np.array([b - a for a, b in excised], dtype=np.float64)
    before = np.concatenate(([0.0], np.cumsum(widths)[:-1]))
    return lo - before, widths


def compress(x, gap_starts, gap_widths) -> np.ndarray:
    """Original x to compressed x; nodes inside a gap never occur."""
    x = np.asarray(x, dtype=np.float64)
    if gap_starts.size == 0:
        return x.copy()
    cum = np.concatenate(([0.0], np.cumsum(gap_widths)))
    orig_starts = gap_starts + cum[:-1]
    return x - cum[np.searchsorted(orig_starts, x, side="left")]


def expand(xc, gap_starts, gap_widths) -> np.ndarray:
    """Compressed x back to original x; a point past a gap start jumps over it."""
    xc = np.asarray(xc, dtype=np.float64)
    if gap_starts.size == 0:
        return xc
    cum = np.concatenate(([0.0], np.cumsum(gap_widths)))
    return xc + cum[np.searchsorted(gap_starts, xc, side="left")]


def make_sampler(table: CumulativeTable, n_d: int, mode="direct", n_e: int = 5) -> Sampler:
    mode = Mode(mode)
    if n_d < 2:
        raise ValueError("n_d must be at least 2")
    table = excise_plateaus(table)
    starts, widths = _gaps(table.excised)
    xc = compress(table.x_nodes, starts, widths)
    g = table.g_values
    ftab = table_from_arrays(xc, g, lambda x: np.interp(x, xc, g))
    grid = build_optimal_grid(ftab, n_d)
    if not grid.monotone or grid.n != n_d:
        raise NotMonotone(f"CDF grid is not monotone ({grid.n} nodes for {n_d} levels)")
    if np.any(np.diff(grid.y_nodes) <= 0):
        raise DegenerateBracket("repeated ordinate in the CDF grid")
    return Sampler(grid, mode, _check_n_e(mode, n_e, grid.n), table, starts, widths)


def _invert_compressed(s: Sampler, y: np.ndarray, backend: str | None = None) -> np.ndarray:
    g = s.grid
    y = np.ascontiguousarray(y, dtype=np.float64)
    xs, ys = g.x_nodes, g.y_nodes
    if s.mode is Mode.DIRECT:
        return kernels.get("invert_direct", backend)(y, xs, ys, g.inv_m, g.inv_q)
    k, m, q = g.kv.k, g.kv.m, g.kv.q
    if s.mode is Mode.LINEAR:
        return kernels.get("invert_linear", backend)(y, xs, ys, k, m, q, g.delta_opt)
    half = 0.5 * s.n_e * g.delta_opt
    return kernels.get("invert_lagrange", backend)(y, xs, ys, k, m, q, half, s.n_e)


def invert_many(s: Sampler, y, backend: str | None = None) -> np.ndarray:
    """``inverse_at`` over an array of ordinates."""
    y = np.asarray(y, dtype=np.float64)
    bad = (y < s.y_min) | (y > s.y_max) | ~np.isfinite(y)
    if bad.any():
        raise OutOfRange(f"{y[bad][0]!r} outside [{s.y_min}, {s.y_max}]")
    out = expand(_invert_compressed(s, y.ravel(), backend), s.gap_starts, s.gap_widths)
    return out.reshape(y.shape)


def inverse_at(s: Sampler, y_r: float) -> float:
    return float(invert_many(s, np.array([y_r]))[0])


def draw(s: Sampler, rng: UniformSource, count: int, backend: str | None = None) -> SampleBatch:
    count = int(count)
    if count < 0:
        raise ValueError("count must be nonnegative")
    out = np.empty(count)
    span = s.y_max - s.y_min
    for a in range(0, count, CHUNK):
        b = min(a + CHUNK, count)
        y = rng.uniforms(b - a)
        if s.y_min != 0.0 or span != 1.0:
            y = s.y_min + span * y
        out[a:b] = expand(_invert_compressed(s, y, backend), s.gap_starts, s.gap_widths)
    return SampleBatch(out, rng.seed, rng.stream, count)


def draw_one(s: Sampler, rng: UniformSource) -> float:
    return float(draw(s, rng, 1).values[0])


def newton_polish(s: Sampler, x, y, density: Callable, iterations: int = 2) -> np.ndarray:
    """Newton steps on ``G(x) = y`` using the (unnormalized) density.

    ``G`` is the sampler's tabulated CDF; the slope is the shifted density
    scaled like the table. Points where the slope vanishes are left alone.
    """
    t = s.table
    x = np.array(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    scale = t.gstar_max - t.gstar_min
    for _ in range(iterations):
        slope = (np.asarray(density(x), dtype=np.float64) + t.shift) / scale
        ok = slope > 0
        x[ok] -= (t.cdf(x[ok]) - y[ok]) / slope[ok]
        np.clip(x, t.x_min, t.x_max, out=x)
    return x
