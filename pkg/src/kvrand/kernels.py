"""Hot loops of the samplers, in a numba flavour and a pure-numpy flavour.

Both flavours perform the same floating-point operations in the same order,
so they return bit-identical results. ``BACKEND`` names the flavour used by
default ("numba" unless numba is missing or ``KVRAND_DISABLE_NUMBA`` is
set); ``get(name, backend)`` returns a specific one.

The inversion kernels assume a monotone grid whose k-vector was built over
``ys`` itself (sorted order equals node order).
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import HAVE_NUMBA, njit

BACKEND = "numba" if HAVE_NUMBA else "numpy"

# endpoint guard for floor(length / dx); lengths are at most ~1e6 steps
FILL_GUARD = 1e-9


# numba ---------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _bracket_nb(yr, ys, k, m, q, half):
    n = ys.size
    lo = yr - half
    hi = yr + half
    r = (lo - q) / m
    ta = n if r >= n else (-n - 1 if r <= -n - 1 else int(math.floor(r)))
    while ta >= 0 and q + m * ta >= lo:
        ta -= 1
    r = (hi - q) / m
    tb = n if r >= n else (-n - 1 if r <= -n - 1 else int(math.ceil(r)))
    while tb <= n - 1 and q + m * tb < hi:
        tb += 1
    if ta < 0:
        start = 0
    elif ta >= n - 1:
        start = n
    else:
        start = k[ta]
    if tb > n - 1:
        stop = n
    elif tb < 0:
        stop = 0
    else:
        stop = k[tb]
    while start < stop and ys[start] < lo:
        start += 1
    while stop > start and ys[stop - 1] > hi:
        stop -= 1
    j = start
    while j + 1 < stop and ys[j + 1] <= yr:
        j += 1
    if j > 0 and ys[j] > yr:
        j -= 1
    if j > n - 2:
        j = n - 2
    return j


@njit(cache=True, nogil=True)
def _invert_direct_nb(y, xs, ys, inv_m, inv_q):
    n = xs.size
    out = np.empty(y.size)
    for i in range(y.size):
        yr = y[i]
        b = int(math.floor(inv_m * yr + inv_q))
        if b < 1:
            b = 1
        elif b > n - 1:
            b = n - 1
        b -= 1
        # settle ties with the node values: y[b] <= y_r < y[b + 1]
        if b < n - 2 and yr >= ys[b + 1]:
            b += 1
        elif b > 0 and yr < ys[b]:
            b -= 1
        xb = xs[b]
        yb = ys[b]
        out[i] = xb + (yr - yb) * (xs[b + 1] - xb) / (ys[b + 1] - yb)
    return out


@njit(cache=True, nogil=True)
def _invert_linear_nb(y, xs, ys, k, m, q, half):
    out = np.empty(y.size)
    for i in range(y.size):
        yr = y[i]
        b = _bracket_nb(yr, ys, k, m, q, half)
        xb = xs[b]
        yb = ys[b]
        out[i] = xb + (yr - yb) * (xs[b + 1] - xb) / (ys[b + 1] - yb)
    return out


@njit(cache=True, nogil=True)
def _invert_lagrange_nb(y, xs, ys, k, m, q, half, n_e):
    n = xs.size
    out = np.empty(y.size)
    for i in range(y.size):
        yr = y[i]
        j = _bracket_nb(yr, ys, k, m, q, half)
        if n_e % 2 == 1:
            c = j if (yr - ys[j]) <= (ys[j + 1] - yr) else j + 1
            s = c - (n_e - 1) // 2
        else:
            s = j - (n_e // 2 - 1)
        if s > n - n_e:
            s = n - n_e
        if s < 0:
            s = 0
        acc = 0.0
        for a in range(n_e):
            w = 1.0
            ya = ys[s + a]
            for b in range(n_e):
                if b != a:
                    w *= (yr - ys[s + b]) / (ya - ys[s + b])
            acc += xs[s + a] * w
        out[i] = acc
    return out


@njit(cache=True, nogil=True)
def _fill_counts_nb(lo, hi, dx):
    counts = np.empty(lo.size, dtype=np.int64)
    for i in range(lo.size):
        counts[i] = int(math.floor((hi[i] - lo[i]) / dx + FILL_GUARD)) + 1
    return counts


@njit(cache=True, nogil=True)
def _fill_intervals_nb(lo, hi, dx):
    counts = _fill_counts_nb(lo, hi, dx)
    out = np.empty(counts.sum())
    p = 0
    for i in range(lo.size):
        for t in range(counts[i]):
            v = lo[i] + t * dx
            out[p] = v if v < hi[i] else hi[i]
            p += 1
    return out


@njit(cache=True, nogil=True)
def _shuffle_nb(values, js):
    n = values.size
    for t in range(n - 1):
        i = n - 1 - t
        j = js[t]
        tmp = values[i]
        values[i] = values[j]
        values[j] = tmp
    return values


# numpy ---------------------------------------------------------------------

def _bracket_np(y, ys, k, m, q, half):
    n = ys.size
    lo = y - half
    hi = y + half
    ta = np.floor(np.clip((lo - q) / m, -n - 1, n)).astype(np.int64)
    while True:
        fix = (ta >= 0) & (q + m * ta >= lo)
        if not fix.any():
            break
        ta[fix] -= 1
    tb = np.ceil(np.clip((hi - q) / m, -n - 1, n)).astype(np.int64)
    while True:
        fix = (tb <= n - 1) & (q + m * tb < hi)
        if not fix.any():
            break
        tb[fix] += 1
    start = np.where(ta < 0, 0, np.where(ta >= n - 1, n, k[np.clip(ta, 0, n - 1)]))
    stop = np.where(tb > n - 1, n, np.where(tb < 0, 0, k[np.clip(tb, 0, n - 1)]))
    while True:
        fix = (start < stop) & (ys[np.minimum(start, n - 1)] < lo)
        if not fix.any():
            break
        start[fix] += 1
    while True:
        fix = (stop > start) & (ys[np.maximum(stop - 1, 0)] > hi)
        if not fix.any():
            break
        stop[fix] -= 1
    j = start.copy()
    while True:
        fix = (j + 1 < stop) & (ys[np.minimum(j + 1, n - 1)] <= y)
        if not fix.any():
            break
        j[fix] += 1
    back = (j > 0) & (ys[np.minimum(j, n - 1)] > y)
    j[back] -= 1
    return np.minimum(j, n - 2)


def _interp_np(y, xs, ys, b):
    xb = xs[b]
    yb = ys[b]
    return xb + (y - yb) * (xs[b + 1] - xb) / (ys[b + 1] - yb)


def _invert_direct_np(y, xs, ys, inv_m, inv_q):
    n = xs.size
    b = np.clip(np.floor(inv_m * y + inv_q), 1, n - 1).astype(np.int64) - 1
    up = (b < n - 2) & (y >= ys[np.minimum(b + 1, n - 1)])
    down = ~up & (b > 0) & (y < ys[b])
    b = b + up - down
    return _interp_np(y, xs, ys, b)


def _invert_linear_np(y, xs, ys, k, m, q, half):
    return _interp_np(y, xs, ys, _bracket_np(y, ys, k, m, q, half))


def _invert_lagrange_np(y, xs, ys, k, m, q, half, n_e):
    n = xs.size
    j = _bracket_np(y, ys, k, m, q, half)
    if n_e % 2 == 1:
        c = np.where((y - ys[j]) <= (ys[j + 1] - y), j, j + 1)
        s = c - (n_e - 1) // 2
    else:
        s = j - (n_e // 2 - 1)
    s = np.maximum(np.minimum(s, n - n_e), 0)
    acc = np.zeros(y.size)
    for a in range(n_e):
        w = np.ones(y.size)
        ya = ys[s + a]
        for b in range(n_e):
            if b != a:
                w *= (y - ys[s + b]) / (ya - ys[s + b])
        acc += xs[s + a] * w
    return acc


def _fill_counts_np(lo, hi, dx):
    return np.floor((hi - lo) / dx + FILL_GUARD).astype(np.int64) + 1


def _fill_intervals_np(lo, hi, dx):
    counts = _fill_counts_np(lo, hi, dx)
    first = np.cumsum(counts) - counts
    t = np.arange(counts.sum()) - np.repeat(first, counts)
    v = np.repeat(lo, counts) + t * dx
    h = np.repeat(hi, counts)
    return np.where(v < h, v, h)


def _shuffle_np(values, js):
    n = values.size
    for t in range(n - 1):
        i = n - 1 - t
        j = js[t]
        values[i], values[j] = values[j], values[i]
    return values


_KERNELS = {
    "numpy": {
        "invert_direct": _invert_direct_np,
        "invert_linear": _invert_linear_np,
        "invert_lagrange": _invert_lagrange_np,
        "fill_counts": _fill_counts_np,
        "fill_intervals": _fill_intervals_np,
        "shuffle": _shuffle_np,
    },
}
if HAVE_NUMBA:
    _KERNELS["numba"] = {
        "invert_direct": _invert_direct_nb,
        "invert_linear": _invert_linear_nb,
        "invert_lagrange": _invert_lagrange_nb,
        "fill_counts": _fill_counts_nb,
        "fill_intervals": _fill_intervals_nb,
        "shuffle": _shuffle_nb,
    }


def available_backends() -> list[str]:
    return sorted(_KERNELS)


def get(name: str, backend: str | None = None):
    backend = backend or BACKEND
    if backend not in _KERNELS:
        raise ValueError(f"backend {backend!r} unavailable; have {available_backends()}")
    return _KERNELS[backend][name]
