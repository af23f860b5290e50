"""Optimal k-vector grids.

The grid nodes are the roots of ``n_d`` uniformly spaced ordinate levels, so
a search window of ``n_e`` level spacings around any ``y_r`` retrieves
``n_e`` nodes per root. On monotone data the bracketing pair can be
computed straight from the inverted k-vector line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyGrid, NotMonotone, OutOfRange
from .inversion import DEFAULT_TOL, FunctionTable, collect_brackets, find_root_clusters, refine_brackets
from .kvector import EPS, KVectorIndex, SortedDatabase, build_kvector, build_sorted_database, range_query


@dataclass(frozen=True)
class OptimalGrid:
    x_nodes: np.ndarray
    y_nodes: np.ndarray
    n_d: int
    delta_opt: float
    monotone: bool
    inv_m: float
    inv_q: float
    db: SortedDatabase
    kv: KVectorIndex

    @property
    def n(self) -> int:
        return int(self.x_nodes.size)

    @property
    def y_min(self) -> float:
        return self.db.y_min

    @property
    def y_max(self) -> float:
        return self.db.y_max


@dataclass(frozen=True)
class BracketPair:
    lo: tuple
    hi: tuple
    lo_index: int

    @property
    def hi_index(self) -> int:
        return self.lo_index + 1


def level_values(y_min: float, y_max: float, n_d: int) -> np.ndarray:
    levels = y_min + (y_max - y_min) * np.arange(n_d, dtype=np.float64) / (n_d - 1)
    levels[-1] = y_max
    return levels


def grid_from_nodes(x_nodes, y_nodes, n_d: int) -> OptimalGrid:
    """Assemble a grid (k-vector, inverse line) from already computed nodes."""
    x = np.array(x_nodes, dtype=np.float64)
    y = np.array(y_nodes, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x_nodes and y_nodes must be 1-d arrays of equal length")
    if x.size < 2:
        raise EmptyGrid(f"grid needs at least 2 nodes, got {x.size}")
    db = build_sorted_database(y)
    kv = build_kvector(db)
    span = db.y_max - db.y_min + 2.0 * kv.delta_eps
    inv_m = (x.size - 1) / span
    inv_q = 1.0 - inv_m * (db.y_min - kv.delta_eps)
    monotone = bool(np.all(np.diff(x) > 0) and np.all(np.diff(y) >= 0))
    delta_opt = (db.y_max - db.y_min) / (n_d - 1) + 4.0 * EPS
    x.setflags(write=False)
    return OptimalGrid(
        x_nodes=x, y_nodes=db.original, n_d=int(n_d), delta_opt=float(delta_opt), monotone=monotone,
        inv_m=float(inv_m), inv_q=float(inv_q), db=db, kv=kv,
    )


def build_optimal_grid(table: FunctionTable, n_d: int, tol: float = DEFAULT_TOL) -> OptimalGrid:
    if n_d < 2:
        raise ValueError("n_d must be at least 2")
    levels = level_values(table.y_min, table.y_max, n_d)
    xs, ys = [], []
    pend_lo, pend_hi, pend_level, pend_slot = [], [], [], []
    for i, level in enumerate(levels):
        exact, lo, hi = collect_brackets(table, find_root_clusters(table, level), all_roots=True)
        xs.append(exact)
        if lo.size:
            pend_lo.append(lo)
            pend_hi.append(hi)
            pend_level.append(np.full(lo.size, level))
            pend_slot.append(np.full(lo.size, i))
    if pend_lo:
        slots = np.concatenate(pend_slot)
        roots = refine_brackets(table.func, np.concatenate(pend_lo), np.concatenate(pend_hi),
                                np.concatenate(pend_level), tol)
        bounds = np.searchsorted(slots, np.arange(n_d + 1))
        for i in range(n_d):
            xs[i] = np.concatenate((xs[i], roots[bounds[i]:bounds[i + 1]]))
    half_dx = 0.5 * table.delta_x
    for i, level in enumerate(levels):
        r = np.sort(xs[i])
        if r.size > 1:
            # a level tangent to f yields the same root from both sides
            r = r[np.concatenate(([True], np.diff(r) >= half_dx))]
        xs[i] = r
        ys.append(np.full(r.size, level))
    x_all = np.concatenate(xs)
    if x_all.size == 0:
        raise EmptyGrid("no level produced a root")
    y_all = np.concatenate(ys)
    order = np.lexsort((y_all, x_all))
    return grid_from_nodes(x_all[order], y_all[order], n_d)


def _window_start(y: np.ndarray, j: int, y_r: float, n_e: int) -> int:
    if n_e % 2:
        centre = j if (y_r - y[j]) <= (y[j + 1] - y_r) else j + 1
        s = centre - (n_e - 1) // 2
    else:
        s = j - (n_e // 2 - 1)
    return max(0, min(s, y.size - n_e))


def query_n_e(grid: OptimalGrid, y_r: float, n_e: int) -> np.ndarray:
    """Node indices associated with each root of ``y = y_r``.

    Returns an ``(n_roots, n_e)`` array of node indices in ascending x
    order. For ``n_e = 2`` each row brackets its root; a root that sits
    exactly on a node is bracketed from above (``y[lo] <= y_r < y[hi]``).
    """
    if n_e < 1:
        raise ValueError("n_e must be at least 1")
    if not grid.y_min <= y_r <= grid.y_max:
        raise OutOfRange(f"{y_r!r} outside [{grid.y_min}, {grid.y_max}]")
    if n_e > grid.n:
        raise ValueError(f"n_e={n_e} exceeds the {grid.n} grid nodes")
    half = 0.5 * n_e * grid.delta_opt
    cand = np.sort(range_query(grid.kv, grid.db, y_r - half, y_r + half, strict=True).indices)
    y = grid.y_nodes
    if n_e == 1:
        runs = np.split(cand, np.flatnonzero(np.diff(cand) > 1) + 1)
        return np.array([[r[np.argmin(np.abs(y[r] - y_r))]] for r in runs if r.size], dtype=np.int64)
    adjacent = cand[:-1][np.diff(cand) == 1]
    lo = np.minimum(y[adjacent], y[adjacent + 1])
    hi = np.maximum(y[adjacent], y[adjacent + 1])
    pairs = adjacent[(lo <= y_r) & (y_r < hi)]
    if pairs.size == 0:
        pairs = adjacent[(lo <= y_r) & (y_r <= hi) & (lo < hi)]
    rows = []
    for j in pairs:
        s = _window_start(y, int(j), y_r, n_e)
        rows.append(np.arange(s, s + n_e))
    return np.array(rows, dtype=np.int64).reshape(-1, n_e)


def direct_bracket(grid: OptimalGrid, y_r: float) -> BracketPair:
    """Bracketing nodes from the inverse k-vector line, without touching the k-vector.

    The floor of the line can land one node low when ``y_r`` equals a node
    value; a single comparison with the neighbouring node settles it so the
    result matches ``query_n_e(grid, y_r, 2)``.
    """
    if not grid.monotone:
        raise NotMonotone("direct bracketing needs a monotone grid")
    if not grid.y_min <= y_r <= grid.y_max:
        raise OutOfRange(f"{y_r!r} outside [{grid.y_min}, {grid.y_max}]")
    b = math.floor(grid.inv_m * y_r + grid.inv_q)
    b = min(max(b, 1), grid.n - 1) - 1
    x, y = grid.x_nodes, grid.y_nodes
    # the line lands within one node of the answer; ties go to y[b] <= y_r < y[b + 1]
    if b < grid.n - 2 and y_r >= y[b + 1]:
        b += 1
    elif b > 0 and y_r < y[b]:
        b -= 1
    return BracketPair(lo=(float(x[b]), float(y[b])), hi=(float(x[b + 1]), float(y[b + 1])), lo_index=b)
