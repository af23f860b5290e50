"""Binary artifact files ("KVRD").

Layout, all little-endian::

    magic      4s   b"KVRD"
    version    u16
    kind       u8   1 = sampler grid, 2 = sample table
    mode       u8   0 linear, 1 direct, 2 lagrange (kind 1 only)
    n_e        u16
    flags      u16  bit 0: samples stored as float32 (kind 2)
    count      u64  grid nodes (kind 1) or samples (kind 2)
    n_d        u64  levels
    n_excised  u64
    13 x f64   x_min x_max y_min y_max inv_m inv_q shift z_min
               gstar_min gstar_max delta_x delta_opt dx_r
    excised    2 x n_excised f64, (lo, hi) pairs
    payload    kind 1: x_nodes f64[count], y_nodes f64[count]
               kind 2: samples f64|f32[count], per_level_counts i64[n_d]

Kind-1 x_nodes are in compressed coordinates (excised intervals squeezed
out); the k-vector and inverse line are rebuilt from the nodes on load,
which is deterministic, so write -> read -> write is byte-exact.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cdf import CumulativeTable
from .errors import BadArtifact
from .lut import SampleTable
from .optimal import grid_from_nodes
from .sampler import Mode, Sampler, _check_n_e, _gaps, expand

MAGIC = b"KVRD"
VERSION = 1
KIND_SAMPLER = 1
KIND_TABLE = 2
FLAG_FLOAT32 = 1

_HEADER = struct.Struct("<4sHBBHHQQQ13d")
_MODES = [Mode.LINEAR, Mode.DIRECT, Mode.LAGRANGE]
_FIELDS = ("x_min", "x_max", "y_min", "y_max", "inv_m", "inv_q", "shift", "z_min",
           "gstar_min", "gstar_max", "delta_x", "delta_opt", "dx_r")


@dataclass
class Artifact:
    kind: int
    meta: dict
    sampler: Sampler | None = None
    table: SampleTable | None = None
    excised: tuple = field(default=())


def _pack(kind, mode, n_e, flags, count, n_d, excised, meta) -> bytes:
    vals = [float(meta.get(k, 0.0)) for k in _FIELDS]
    head = _HEADER.pack(MAGIC, VERSION, kind, mode, n_e, flags, count, n_d, len(excised), *vals)
    pairs = np.asarray(excised, dtype="<f8").reshape(-1)
    return head + pairs.tobytes()


def sampler_bytes(s: Sampler) -> bytes:
    t, g = s.table, s.grid
    meta = dict(
        x_min=t.x_min, x_max=t.x_max, y_min=g.y_min, y_max=g.y_max, inv_m=g.inv_m, inv_q=g.inv_q,
        shift=t.shift, z_min=t.z_min, gstar_min=t.gstar_min, gstar_max=t.gstar_max,
        delta_x=t.delta_x, delta_opt=g.delta_opt,
    )
    head = _pack(KIND_SAMPLER, _MODES.index(s.mode), s.n_e, 0, g.n, g.n_d, s.excised, meta)
    return head + g.x_nodes.astype("<f8").tobytes() + g.y_nodes.astype("<f8").tobytes()


def table_bytes(t: SampleTable, x_min: float, x_max: float, dx_r: float) -> bytes:
    f32 = t.samples.dtype == np.float32
    meta = dict(x_min=x_min, x_max=x_max, dx_r=dx_r)
    if len(t):
        meta.update(y_min=float(t.samples.min()), y_max=float(t.samples.max()))
    head = _pack(KIND_TABLE, 0, 0, FLAG_FLOAT32 if f32 else 0, len(t), t.per_level_counts.size, (), meta)
    body = t.samples.astype("<f4" if f32 else "<f8").tobytes()
    return head + body + t.per_level_counts.astype("<i8").tobytes()


def from_bytes(data: bytes) -> Artifact:
    if len(data) < _HEADER.size:
        raise BadArtifact("file too short for a header")
    magic, version, kind, mode, n_e, flags, count, n_d, n_exc, *vals = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadArtifact(f"bad magic {magic!r}")
    if version != VERSION:
        raise BadArtifact(f"unsupported version {version}")
    meta = dict(zip(_FIELDS, vals))
    off = _HEADER.size
    try:
        pairs = np.frombuffer(data, dtype="<f8", count=2 * n_exc, offset=off)
        off += pairs.nbytes
        excised = tuple((float(a), float(b)) for a, b in pairs.reshape(-1, 2))
        if kind == KIND_SAMPLER:
            expect = off + 16 * count
            x = np.frombuffer(data, dtype="<f8", count=count, offset=off).astype(np.float64)
            y = np.frombuffer(data, dtype="<f8", count=count, offset=off + 8 * count).astype(np.float64)
        elif kind == KIND_TABLE:
            size = 4 if flags & FLAG_FLOAT32 else 8
            expect = off + size * count + 8 * n_d
            samples = np.frombuffer(data, dtype="<f4" if size == 4 else "<f8", count=count, offset=off)
            per_level = np.frombuffer(data, dtype="<i8", count=n_d, offset=off + size * count)
        else:
            raise BadArtifact(f"unknown artifact kind {kind}")
    except ValueError as exc:
        raise BadArtifact(f"truncated payload: {exc}") from None
    if len(data) != expect:
        raise BadArtifact(f"payload length {len(data)} does not match header ({expect})")
    if kind == KIND_TABLE:
        samples = samples.astype(np.float32 if size == 4 else np.float64)
        samples.setflags(write=False)
        return Artifact(kind, meta, table=SampleTable(samples, per_level.astype(np.int64)))
    if mode >= len(_MODES):
        raise BadArtifact(f"unknown mode {mode}")
    try:
        grid = grid_from_nodes(x, y, n_d)
        mode_ = _MODES[mode]
        n_e = _check_n_e(mode_, n_e, grid.n)
    except (ValueError, ArithmeticError) as exc:
        raise BadArtifact(f"inconsistent grid: {exc}") from None
    if not grid.monotone or grid.inv_m != meta["inv_m"] or grid.inv_q != meta["inv_q"]:
        raise BadArtifact("grid does not reproduce the stored inverse line")
    starts, widths = _gaps(excised)
    xo = expand(x, starts, widths)
    xo[0], xo[-1] = meta["x_min"], meta["x_max"]
    table = CumulativeTable(
        x_nodes=xo, g_values=grid.y_nodes, z_min=meta["z_min"], shift=meta["shift"],
        gstar_min=meta["gstar_min"], gstar_max=meta["gstar_max"], delta_x=meta["delta_x"], excised=excised,
    )
    return Artifact(kind, meta, sampler=Sampler(grid, mode_, n_e, table, starts, widths), excised=excised)


def save_sampler(path, s: Sampler) -> None:
    Path(path).write_bytes(sampler_bytes(s))


def save_table(path, t: SampleTable, x_min: float, x_max: float, dx_r: float) -> None:
    Path(path).write_bytes(table_bytes(t, x_min, x_max, dx_r))


def load(path) -> Artifact:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise BadArtifact(f"cannot read artifact {path}: {exc.strerror}") from None
    return from_bytes(data)


def to_bytes(a: Artifact) -> bytes:
    if a.kind == KIND_SAMPLER:
        return sampler_bytes(a.sampler)
    return table_bytes(a.table, a.meta["x_min"], a.meta["x_max"], a.meta["dx_r"])
