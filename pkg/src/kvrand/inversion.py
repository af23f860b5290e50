"""Nonlinear function inversion with the k-vector.

A function is tabulated once on a uniform grid; inverting ``f(x) = y_r``
then retrieves every grid point within half the largest grid step of
``y_r``, groups the retrieved points into clusters (one per root) and
refines each cluster's bracket with regula falsi.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import MaxIterationsExceeded, NoRootFound, NonFiniteFunctionValue, NoSignChange
from .kvector import EPS, KVectorIndex, SortedDatabase, build_kvector, build_sorted_database, range_query

# consecutive retrieved points farther apart than this many grid steps belong to different roots
CLUSTER_GAP = 1.5

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100


@dataclass(frozen=True)
class FunctionTable:
    x_grid: np.ndarray
    y_vals: np.ndarray
    delta: float
    delta_x: float
    x_min: float
    x_max: float
    db: SortedDatabase
    kv: KVectorIndex
    func: Callable = field(repr=False, compare=False)

    @property
    def n(self) -> int:
        return int(self.x_grid.size)

    @property
    def y_min(self) -> float:
        return self.db.y_min

    @property
    def y_max(self) -> float:
        return self.db.y_max


@dataclass(frozen=True)
class Crossing:
    """A single sign change of ``f - y_r`` between grid nodes ``lo`` and ``hi``.

    ``exact`` is the grid node where ``f == y_r`` holds exactly, or -1.
    """

    lo: int
    hi: int
    exact: int = -1


@dataclass(frozen=True)
class RootEstimate:
    bracket_lo: tuple
    bracket_hi: tuple
    refined_x: float | None
    cluster_points: np.ndarray
    extremum: bool = False
    crossings: tuple = ()


def _evaluate(f: Callable, x: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        y = np.asarray(f(x), dtype=np.float64)
    return np.broadcast_to(y, np.shape(x)).copy()


def table_from_arrays(x_grid, y_vals, func: Callable) -> FunctionTable:
    """Wrap an existing uniform tabulation (``func`` is used only for refinement)."""
    x = np.asarray(x_grid, dtype=np.float64)
    y = np.asarray(y_vals, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x_grid and y_vals must be 1-d arrays of equal length")
    bad = np.flatnonzero(~np.isfinite(y))
    if bad.size:
        raise NonFiniteFunctionValue(f"f({x[bad[0]]!r}) is not finite", x=float(x[bad[0]]))
    db = build_sorted_database(y)
    kv = build_kvector(db)
    delta = float(np.max(np.abs(np.diff(y)))) + 4.0 * EPS
    delta_x = (float(x[-1]) - float(x[0])) / (x.size - 1)
    x.setflags(write=False)
    return FunctionTable(
        x_grid=x, y_vals=db.original, delta=delta, delta_x=delta_x,
        x_min=float(x[0]), x_max=float(x[-1]), db=db, kv=kv, func=func,
    )


def tabulate(f: Callable, x_min: float, x_max: float, n: int) -> FunctionTable:
    """Sample vectorized ``f`` on ``n`` uniform points of ``[x_min, x_max]``."""
    if not x_min < x_max:
        raise ValueError(f"need x_min < x_max, got [{x_min}, {x_max}]")
    if n < 2:
        raise ValueError("n must be at least 2")
    x = np.linspace(x_min, x_max, int(n))
    return table_from_arrays(x, _evaluate(f, x), f)


def _crossings(d: np.ndarray, offset: int) -> tuple[list, list]:
    """Sign changes and tangencies of ``d`` (local indices shifted by ``offset``)."""
    sg = np.sign(d)
    out = [Crossing(int(j) + offset, int(j) + 1 + offset) for j in np.flatnonzero(sg[:-1] * sg[1:] < 0)]
    tangents = []
    zeros = np.flatnonzero(sg == 0)
    if zeros.size:
        last = sg.size - 1
        for run in np.split(zeros, np.flatnonzero(np.diff(zeros) > 1) + 1):
            p, q = int(run[0]), int(run[-1])
            left = sg[p - 1] if p > 0 else 0
            right = sg[q + 1] if q < last else 0
            if left != 0 and left == right:
                tangents.append(p + offset)
                continue
            hit = q if p == 0 and q < last else p
            out.append(Crossing(max(p - 1, 0) + offset, min(q + 1, last) + offset, hit + offset))
    out.sort(key=lambda c: (c.lo, c.hi))
    return out, tangents


def find_root_clusters(table: FunctionTable, y_r: float) -> list[RootEstimate]:
    """Locate the roots of ``f(x) - y_r`` on the table, one estimate per cluster.

    Clusters whose flanks do not straddle ``y_r`` (an even number of sign
    changes, typically next to a local extremum) come back with
    ``extremum=True``; their individual sign changes are still listed in
    ``crossings``.
    """
    half = 0.5 * table.delta
    res = range_query(table.kv, table.db, y_r - half, y_r + half, strict=True)
    if res.indices.size == 0:
        raise NoRootFound(f"{y_r!r} is outside the attained range [{table.y_min}, {table.y_max}]")
    idx = np.sort(res.indices)
    xs = table.x_grid[idx]
    cuts = np.flatnonzero(np.diff(xs) / table.delta_x > CLUSTER_GAP) + 1
    x, y = table.x_grid, table.y_vals
    last = table.n - 1
    out = []
    for cluster in np.split(idx, cuts):
        a = max(int(cluster[0]) - 1, 0)
        b = min(int(cluster[-1]) + 1, last)
        crossings, tangents = _crossings(y[a:b + 1] - y_r, a)
        pts = np.column_stack((x[cluster], y[cluster]))
        if len(crossings) % 2 == 1:
            c = crossings[len(crossings) // 2]
            out.append(RootEstimate(
                bracket_lo=(float(x[c.lo]), float(y[c.lo])),
                bracket_hi=(float(x[c.hi]), float(y[c.hi])),
                refined_x=float(x[c.exact]) if c.exact >= 0 else None,
                cluster_points=pts,
                crossings=tuple(crossings),
            ))
        elif crossings or tangents:
            tang = tuple(Crossing(max(t - 1, 0), min(t + 1, last), t) for t in tangents)
            out.append(RootEstimate(
                bracket_lo=(float(x[a]), float(y[a])),
                bracket_hi=(float(x[b]), float(y[b])),
                refined_x=None,
                cluster_points=pts,
                extremum=True,
                crossings=tuple(sorted(crossings + list(tang), key=lambda c: (c.lo, c.hi))),
            ))
    return out


def refine_brackets(f: Callable, lo, hi, y_r, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                    raise_on_fail: bool = True) -> np.ndarray:
    """Vectorized regula falsi on the brackets ``[lo[i], hi[i]]`` of ``f - y_r[i]``.

    An endpoint kept three iterations in a row triggers a bisection step.
    Iteration stops per bracket once ``|f(x) - y_r| <= tol`` or the bracket
    is narrower than ``tol``. Returned roots never leave their bracket.
    """
    a = np.array(lo, dtype=np.float64, ndmin=1)
    b = np.array(hi, dtype=np.float64, ndmin=1)
    yr = np.broadcast_to(np.asarray(y_r, dtype=np.float64), a.shape).copy()
    fa = _evaluate(f, a) - yr
    fb = _evaluate(f, b) - yr
    if np.any(fa * fb > 0):
        raise NoSignChange("f - y_r has the same sign at both ends of a bracket")
    x = np.where(fa == 0, a, b)
    done = (fa == 0) | (fb == 0) | (b - a <= tol)
    x = np.where(done & (fa != 0) & (fb != 0), 0.5 * (a + b), x)
    # consecutive iterations that moved the same endpoint (+ for a, - for b)
    streak = np.zeros(a.shape, dtype=np.int64)
    for _ in range(max_iter):
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        aa, bb, ffa, ffb = a[act], b[act], fa[act], fb[act]
        with np.errstate(all="ignore"):
            c = aa - ffa * (bb - aa) / (ffb - ffa)
        bisect = (np.abs(streak[act]) >= 3) | ~(c > aa) | ~(c < bb)
        c = np.where(bisect, 0.5 * (aa + bb), c)
        fc = _evaluate(f, c) - yr[act]
        if not np.all(np.isfinite(fc)):
            raise NonFiniteFunctionValue("non-finite function value during refinement")
        move_a = np.sign(fc) == np.sign(ffa)
        a[act] = np.where(move_a, c, aa)
        fa[act] = np.where(move_a, fc, ffa)
        b[act] = np.where(move_a, bb, c)
        fb[act] = np.where(move_a, ffb, fc)
        st = streak[act]
        st = np.where(move_a, np.where(st > 0, st + 1, 1), np.where(st < 0, st - 1, -1))
        streak[act] = np.where(bisect, 0, st)
        x[act] = c
        stalled = (c <= aa) | (c >= bb)
        done[act] = (np.abs(fc) <= tol) | (b[act] - a[act] <= tol) | stalled
    if not np.all(done):
        if raise_on_fail:
            raise MaxIterationsExceeded(f"no convergence within {max_iter} iterations", estimate=x)
    return x


def refine_root(f: Callable, est: RootEstimate, y_r: float, tol: float = DEFAULT_TOL,
                max_iter: int = DEFAULT_MAX_ITER) -> float:
    """Refine one bracketed root; exact grid hits are returned unchanged."""
    if est.refined_x is not None:
        return float(est.refined_x)
    try:
        return float(refine_brackets(f, est.bracket_lo[0], est.bracket_hi[0], y_r, tol, max_iter)[0])
    except MaxIterationsExceeded as exc:
        raise MaxIterationsExceeded(str(exc), estimate=float(exc.estimate[0])) from None


def refine_newton(f: Callable, fprime: Callable, x0: float, y_r: float, tol: float = DEFAULT_TOL,
                  max_iter: int = DEFAULT_MAX_ITER, bracket: tuple | None = None) -> float:
    """Newton iteration from ``x0``; steps leaving ``bracket`` are bisected back."""
    x = float(x0)
    for _ in range(max_iter):
        fx = float(f(x)) - y_r
        if abs(fx) <= tol:
            return x
        d = float(fprime(x))
        if d == 0.0 or not np.isfinite(d):
            raise NoSignChange(f"zero derivative at x={x!r}")
        step = fx / d
        nxt = x - step
        if bracket is not None:
            lo, hi = bracket
            if not lo <= nxt <= hi:
                nxt = 0.5 * (x + (lo if nxt < lo else hi))
        if abs(nxt - x) <= tol:
            return nxt
        x = nxt
    raise MaxIterationsExceeded(f"no convergence within {max_iter} iterations", estimate=x)


def invert(table: FunctionTable, y_r: float, tol: float = DEFAULT_TOL, all_roots: bool = False) -> np.ndarray:
    """All roots of ``f(x) = y_r`` on the table, ascending.

    By default clusters flagged as extrema are dropped, as is done when
    partitioning the domain; ``all_roots=True`` refines every sign change
    and keeps tangency points too.
    """
    exact, lo, hi = collect_brackets(table, find_root_clusters(table, y_r), all_roots)
    roots = exact
    if lo.size:
        roots = np.concatenate((exact, refine_brackets(table.func, lo, hi, y_r, tol)))
    return np.sort(roots)


def collect_brackets(table: FunctionTable, ests, all_roots: bool = False):
    """Split estimates into exact grid hits and ``(lo, hi)`` brackets still to refine."""
    x = table.x_grid
    exact, lo, hi = [], [], []
    for est in ests:
        if all_roots:
            cs = est.crossings
        elif est.extremum:
            continue
        else:
            cs = (est.crossings[len(est.crossings) // 2],)
        for c in cs:
            if c.exact >= 0:
                exact.append(x[c.exact])
            else:
                lo.append(x[c.lo])
                hi.append(x[c.hi])
    as_arr = lambda v: np.asarray(v, dtype=np.float64)
    return as_arr(exact), as_arr(lo), as_arr(hi)
