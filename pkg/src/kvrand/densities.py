"""Builtin densities."""
from __future__ import annotations

import numpy as np
from scipy import special

# Ai(0) and -Ai'(0)
_AI0 = 0.355028053887817239260
_AIP0 = 0.258819403792806798405

AIRY_MAX_ABS_X = 12.0


def normal_pdf(x, mu: float = 0.0, sigma: float = 1.0):
    z = (np.asarray(x, dtype=np.float64) - mu) / sigma
    return np.exp(-0.5 * z * z) / (sigma * np.sqrt(2.0 * np.pi))


def normal_cdf(x, mu: float = 0.0, sigma: float = 1.0):
    return 0.5 * (1.0 + special.erf((np.asarray(x, dtype=np.float64) - mu) / (sigma * np.sqrt(2.0))))


def airy_ai(x):
    """Airy function Ai from its two Maclaurin series.

    Valid for ``|x| <= 12``. The alternating terms cancel for negative
    ``x``; the absolute error grows roughly like
    ``1e-16 * exp(2/3 * |x|**1.5)`` (about 1e-9 at ``x = -8``).
    """
    x = np.asarray(x, dtype=np.float64)
    if np.any(np.abs(x) > AIRY_MAX_ABS_X):
        raise ValueError(f"airy_ai series is only used on |x| <= {AIRY_MAX_ABS_X}")
    x3 = x * x * x
    f_term = np.ones_like(x)
    g_term = x.copy()
    f_sum = f_term.copy()
    g_sum = g_term.copy()
    k = 1
    while True:
        f_term = f_term * x3 / ((3 * k - 1) * (3 * k))
        g_term = g_term * x3 / ((3 * k) * (3 * k + 1))
        f_sum += f_term
        g_sum += g_term
        if np.all(np.abs(f_term) <= 1e-17 * np.abs(f_sum)) and np.all(np.abs(g_term) <= 1e-17 * np.maximum(np.abs(g_sum), 1e-300)):
            break
        k += 1
        if k > 200:
            break
    return _AI0 * f_sum - _AIP0 * g_sum


BUILTINS = {
    "normal": {"params": {"mu": 0.0, "sigma": 1.0}, "pdf": normal_pdf, "cdf": normal_cdf},
    "airy_ai": {"params": {}, "pdf": airy_ai, "cdf": None},
}
