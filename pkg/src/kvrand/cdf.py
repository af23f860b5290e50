"""From a distribution description to a normalized cumulative table on [0, 1]."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .densities import BUILTINS
from .errors import AllZeroDensity, DensityEvaluationError, TableFormatError
from .expression import compile_expression
from .kvector import EPS

DEFAULT_GRID_N = 100_001


@dataclass(frozen=True)
class DistributionSpec:
    kind: str
    payload: object
    x_min: float
    x_max: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("builtin", "expression", "tabulated"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if not self.x_min < self.x_max:
            raise ValueError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")

    @classmethod
    def builtin(cls, name: str, x_min: float, x_max: float, **params) -> "DistributionSpec":
        if name not in BUILTINS:
            raise ValueError(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}")
        merged = dict(BUILTINS[name]["params"])
        unknown = set(params) - set(merged)
        if unknown:
            raise ValueError(f"{name} takes no parameter(s) {sorted(unknown)}")
        merged.update(params)
        return cls("builtin", name, float(x_min), float(x_max), merged)

    @classmethod
    def expression(cls, text: str, x_min: float, x_max: float) -> "DistributionSpec":
        compile_expression(text)  # fail early on syntax errors
        return cls("expression", text, float(x_min), float(x_max))

    @classmethod
    def tabulated(cls, x, pdf, x_min: float | None = None, x_max: float | None = None) -> "DistributionSpec":
        x = np.asarray(x, dtype=np.float64)
        pdf = np.asarray(pdf, dtype=np.float64)
        if x.ndim != 1 or x.shape != pdf.shape or x.size < 2:
            raise TableFormatError("tabulated density needs at least two (x, pdf) rows")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(pdf)):
            raise TableFormatError("tabulated density contains non-finite values")
        if np.any(np.diff(x) <= 0):
            raise TableFormatError("tabulated x values must be strictly ascending")
        lo = float(x[0]) if x_min is None else float(x_min)
        hi = float(x[-1]) if x_max is None else float(x_max)
        if lo < x[0] or hi > x[-1]:
            raise TableFormatError(f"domain [{lo}, {hi}] exceeds the table range [{x[0]}, {x[-1]}]")
        return cls("tabulated", (x, pdf), lo, hi)

    def density(self) -> Callable:
        if self.kind == "builtin":
            pdf, params = BUILTINS[self.payload]["pdf"], self.params
            return lambda x: pdf(x, **params)
        if self.kind == "expression":
            return compile_expression(self.payload)
        xs, ps = self.payload
        return lambda x: np.interp(x, xs, ps)

    def closed_cdf(self) -> Callable | None:
        if self.kind == "builtin" and BUILTINS[self.payload]["cdf"] is not None:
            cdf, params = BUILTINS[self.payload]["cdf"], self.params
            return lambda x: cdf(x, **params)
        return None


def read_table(path) -> DistributionSpec:
    """Two-column ``x pdf`` text (whitespace or comma separated, ``#`` comments)."""
    xs, ps = [], []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].replace(",", " ").strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise TableFormatError(f"{path}:{lineno}: expected 2 columns, got {len(parts)}")
        try:
            xs.append(float(parts[0]))
            ps.append(float(parts[1]))
        except ValueError:
            raise TableFormatError(f"{path}:{lineno}: not a number in {raw.strip()!r}") from None
    return DistributionSpec.tabulated(xs, ps)


@dataclass(frozen=True)
class CumulativeTable:
    """Normalized CDF on a uniform grid.

    After plateau excision ``x_nodes`` skips the interior of each removed
    interval; ``excised`` lists those ``(x_lo, x_hi)`` intervals.
    """

    x_nodes: np.ndarray
    g_values: np.ndarray
    z_min: float
    shift: float
    gstar_min: float
    gstar_max: float
    delta_x: float
    excised: tuple = ()

    @property
    def x_min(self) -> float:
        return float(self.x_nodes[0])

    @property
    def x_max(self) -> float:
        return float(self.x_nodes[-1])

    def cdf(self, x):
        """Piecewise-linear interpolation of the table."""
        return np.interp(x, self.x_nodes, self.g_values)


def build_cdf(spec: DistributionSpec, n: int = DEFAULT_GRID_N) -> CumulativeTable:
    if n < 2:
        raise ValueError("n must be at least 2")
    x = np.linspace(spec.x_min, spec.x_max, int(n))
    with np.errstate(all="ignore"):
        try:
            z = np.broadcast_to(np.asarray(spec.density()(x), dtype=np.float64), x.shape)
        except (ValueError, ArithmeticError) as exc:
            raise DensityEvaluationError(f"density evaluation failed: {exc}") from exc
    bad = np.flatnonzero(~np.isfinite(z))
    if bad.size:
        raise DensityEvaluationError(f"density is not finite at x={x[bad[0]]!r}")
    z_min = float(z.min())
    shift = max(0.0, -z_min)
    closed = spec.closed_cdf()
    if closed is not None and shift == 0.0:
        gstar = np.asarray(closed(x), dtype=np.float64)
    else:
        w = z + shift
        dx = (spec.x_max - spec.x_min) / (n - 1)
        gstar = np.concatenate(([0.0], np.cumsum(0.5 * dx * (w[1:] + w[:-1]))))
    g_lo, g_hi = float(gstar.min()), float(gstar.max())
    if not g_hi > g_lo:
        raise AllZeroDensity("density integrates to zero on the domain")
    g = (gstar - g_lo) / (g_hi - g_lo)
    return CumulativeTable(
        x_nodes=x, g_values=g, z_min=z_min, shift=shift, gstar_min=g_lo, gstar_max=g_hi,
        delta_x=float(x[1] - x[0]),
    )


def excise_plateaus(table: CumulativeTable, tol: float = 16 * EPS) -> CumulativeTable:
    """Collapse flat runs of the CDF (zero density) onto their left endpoint.

    ``tol`` is relative to the normalized range, so the default equals
    ``16 eps (G*_max - G*_min)`` in raw units.
    """
    g = table.g_values
    step_ok = np.diff(g) >= tol
    if np.all(step_ok):
        return table
    keep = np.concatenate(([True], step_ok))
    excised = list(table.excised)
    flat = np.flatnonzero(~step_ok)
    for run in np.split(flat, np.flatnonzero(np.diff(flat) > 1) + 1):
        excised.append((float(table.x_nodes[run[0]]), float(table.x_nodes[run[-1] + 1])))
    excised.sort()
    return CumulativeTable(
        x_nodes=table.x_nodes[keep], g_values=g[keep], z_min=table.z_min, shift=table.shift,
        gstar_min=table.gstar_min, gstar_max=table.gstar_max, delta_x=table.delta_x,
        excised=tuple(excised),
    )
