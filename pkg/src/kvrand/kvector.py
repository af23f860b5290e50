"""k-vector range searching over a static database.

The k-vector stores, for each of ``n`` equally spaced reference levels of a
line through the (padded) minimum and maximum of the sorted data, how many
elements sit at or below that level. A range query then needs two line
evaluations, two table lookups and an optional local trim; nothing in it
depends on ``n``.

Indices are 0-based: ``sort_index`` points into the original array and
level ``t`` of the reference line is ``q + m * t`` for ``t = 0 .. n-1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidRange, NonFiniteValue, TooFewElements

EPS = float(np.finfo(np.float64).eps)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SortedDatabase:
    values: np.ndarray
    sort_index: np.ndarray
    original: np.ndarray

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def y_min(self) -> float:
        return float(self.values[0])

    @property
    def y_max(self) -> float:
        return float(self.values[-1])


@dataclass(frozen=True)
class KVectorIndex:
    k: np.ndarray
    m: float
    q: float
    machine_eps: float
    delta_eps: float

    @property
    def n(self) -> int:
        return int(self.k.size)

    def level(self, t):
        """Reference line value at 0-based level ``t``."""
        return self.q + self.m * t


@dataclass(frozen=True)
class RangeResult:
    """Outcome of a range query.

    ``ka``/``kb`` are the reference-line levels bracketing the query,
    ``start:stop`` the slice of the sorted array that was retrieved and
    ``indices`` the matching positions in the original array.
    """

    ka: int
    kb: int
    start: int
    stop: int
    indices: np.ndarray

    def __len__(self) -> int:
        return self.stop - self.start


def build_sorted_database(values) -> SortedDatabase:
    y = np.array(values, dtype=np.float64).ravel()
    if y.size < 2:
        raise TooFewElements(f"need at least 2 elements, got {y.size}")
    bad = np.flatnonzero(~np.isfinite(y))
    if bad.size:
        raise NonFiniteValue(f"non-finite value at position {bad[0]}", position=int(bad[0]))
    order = np.argsort(y, kind="stable")
    return SortedDatabase(values=_frozen(y[order]), sort_index=_frozen(order), original=_frozen(y))


def line_padding(db: SortedDatabase) -> float:
    # (n-1)*eps is an absolute pad; scale it so it survives large magnitudes
    scale = max(1.0, abs(db.y_min), abs(db.y_max))
    return (db.n - 1) * EPS * scale


def build_kvector(db: SortedDatabase) -> KVectorIndex:
    n = db.n
    delta_eps = line_padding(db)
    m = (db.y_max - db.y_min + 2.0 * delta_eps) / (n - 1)
    q = db.y_min - delta_eps
    levels = q + m * np.arange(n, dtype=np.float64)
    k = np.searchsorted(db.values, levels, side="right").astype(np.int64)
    k[0] = 0
    k[-1] = n
    return KVectorIndex(k=_frozen(k), m=float(m), q=float(q), machine_eps=EPS, delta_eps=float(delta_eps))


def _clamped_floor(r: float, n: int) -> int:
    if r >= n:
        return n
    if r <= -n - 1:
        return -n - 1
    return math.floor(r)


def _window(kv: KVectorIndex, y_a: float, y_b: float) -> tuple[int, int, int, int]:
    n = kv.n
    m, q = kv.m, kv.q
    # level ta must lie strictly below y_a so that no element equal to y_a is skipped
    ta = _clamped_floor((y_a - q) / m, n)
    while ta >= 0 and q + m * ta >= y_a:
        ta -= 1
    tb = -_clamped_floor(-(y_b - q) / m, n)
    while tb <= n - 1 and q + m * tb < y_b:
        tb += 1
    if ta < 0:
        start = 0
    elif ta >= n - 1:
        start = n
    else:
        start = int(kv.k[ta])
    if tb > n - 1:
        stop = n
    elif tb < 0:
        stop = 0
    else:
        stop = int(kv.k[tb])
    return ta, tb, start, max(start, stop)


def range_query(kv: KVectorIndex, db: SortedDatabase, y_a: float, y_b: float, strict: bool = True) -> RangeResult:
    """Retrieve all elements with ``y_a <= value <= y_b``.

    With ``strict=False`` the result may also contain the neighbours just
    outside the range (on average about one element).
    """
    if not y_a <= y_b:
        raise InvalidRange(f"empty range [{y_a}, {y_b}]")
    ta, tb, start, stop = _window(kv, float(y_a), float(y_b))
    if strict:
        s = db.values
        while start < stop and s[start] < y_a:
            start += 1
        while stop > start and s[stop - 1] > y_b:
            stop -= 1
    return RangeResult(ka=ta, kb=tb, start=start, stop=stop, indices=db.sort_index[start:stop])
