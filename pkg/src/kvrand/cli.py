"""Command-line interface.

Exit codes: 0 ok, 1 usage or I/O error, 2 parse error (expression, table,
artifact), 3 numeric error, 4 ``validate`` ran but the sample failed.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import artifact, kernels
from .cdf import DEFAULT_GRID_N, DistributionSpec, build_cdf, read_table
from .densities import BUILTINS
from .errors import KvrandError, UsageError
from .inversion import invert, tabulate
from .lut import LevelPlan, build_sample_table, draw_from_table
from .rng import UniformSource
from .sampler import Mode, draw, make_sampler
from .stats import chi_square, histogram, ks_statistic, pool_bins

EXIT_FAILED = 4
KS_COEFF = 1.63  # alpha = 0.01
CHI2_MIN_P = 1e-3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def count_arg(text: str) -> int:
    """Nonnegative integer, scientific notation allowed (``1e7``)."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v < 0 or v != int(v):
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}")
    return int(v)


def _add_spec_flags(p):
    p.add_argument("builtin", nargs="?", choices=sorted(BUILTINS), help="builtin density")
    p.add_argument("--expr", help="density expression in x")
    p.add_argument("--table", help="two-column (x, pdf) text file")
    p.add_argument("--mu", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--xmin", type=float)
    p.add_argument("--xmax", type=float)


def _spec(args) -> DistributionSpec:
    given = [v is not None for v in (args.builtin, args.expr, args.table)]
    if sum(given) != 1:
        raise UsageError("give exactly one of: a builtin name, --expr, --table")
    if args.table:
        tab = read_table(args.table)
        x, pdf = tab.payload
        return DistributionSpec.tabulated(x, pdf, args.xmin, args.xmax)
    if args.xmin is None or args.xmax is None:
        raise UsageError("--xmin and --xmax are required")
    if args.expr is not None:
        return DistributionSpec.expression(args.expr, args.xmin, args.xmax)
    params = {k: getattr(args, k) for k in ("mu", "sigma") if getattr(args, k) is not None}
    try:
        return DistributionSpec.builtin(args.builtin, args.xmin, args.xmax, **params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _report(fh, **fields):
    for k, v in fields.items():
        if isinstance(v, float):
            v = f"{v:.6g}"
        print(f"{k}={v}", file=fh)


def cmd_build(args, out):
    spec = _spec(args)
    t0 = time.perf_counter()
    s = make_sampler(build_cdf(spec, args.grid_n), args.nd, args.mode, args.ne)
    artifact.save_sampler(args.out, s)
    _report(out, kind=1, nodes=s.grid.n, excised=len(s.excised), mode=s.mode.value,
            build_time=time.perf_counter() - t0, out=args.out)


def cmd_lut_build(args, out):
    spec = _spec(args)
    t0 = time.perf_counter()
    table = tabulate(spec.density(), spec.x_min, spec.x_max, args.grid_n)
    st = build_sample_table(LevelPlan(args.nd, args.dxr, table), float32=args.float32)
    artifact.save_table(args.out, st, spec.x_min, spec.x_max, args.dxr)
    _report(out, kind=2, size=len(st), levels=st.per_level_counts.size,
            build_time=time.perf_counter() - t0, out=args.out)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("KVRAND_SEED")
    if env:
        try:
            return count_arg(env)
        except argparse.ArgumentTypeError:
            raise UsageError(f"KVRAND_SEED is not a nonnegative integer: {env!r}") from None
    return 0


def _draw(a: artifact.Artifact, seed: int, stream: int, count: int) -> np.ndarray:
    rng = UniformSource(seed, stream)
    if a.kind == artifact.KIND_SAMPLER:
        return draw(a.sampler, rng, count).values
    return draw_from_table(a.table, rng, count).values


def draw_streams(a: artifact.Artifact, seed: int, stream: int, count: int, threads: int = 1) -> np.ndarray:
    """``count`` draws split across ``threads`` consecutive streams, concatenated in stream order."""
    threads = max(1, int(threads))
    sizes = [count // threads + (i < count % threads) for i in range(threads)]
    if threads == 1:
        return _draw(a, seed, stream, count)
    with ThreadPoolExecutor(threads) as ex:
        parts = list(ex.map(lambda i: _draw(a, seed, stream + i, sizes[i]), range(threads)))
    return np.concatenate(parts)


def write_samples(values: np.ndarray, path: str, fmt: str) -> None:
    if fmt == "raw64":
        data = values.astype("<f8").tobytes()
        if path == "-":
            sys.stdout.buffer.write(data)
            sys.stdout.buffer.flush()
        else:
            with open(path, "wb") as fh:
                fh.write(data)
        return
    fh = sys.stdout if path == "-" else open(path, "w")
    try:
        for a in range(0, values.size, 1 << 18):
            chunk = values[a:a + (1 << 18)]
            if chunk.size:
                fh.write("\n".join(["%.17g" % v for v in chunk.tolist()]) + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()


def read_samples(path: str, fmt: str) -> np.ndarray:
    if fmt == "raw64":
        data = open(path, "rb").read()
        if len(data) % 8:
            raise UsageError(f"{path}: length is not a multiple of 8 bytes")
        return np.frombuffer(data, dtype="<f8").astype(np.float64)
    return np.loadtxt(path, dtype=np.float64, ndmin=1)


def cmd_sample(args, out):
    a = artifact.load(args.artifact)
    values = draw_streams(a, _seed(args), args.stream, args.count, args.threads)
    write_samples(values, args.out, args.format)


def _reference(a: artifact.Artifact, args):
    """Reference CDF and domain for validating draws from ``a``.

    A distribution given on the command line wins; otherwise the artifact's
    own nodes (kind 1, linear between nodes) or stored samples (kind 2).
    """
    if any(v is not None for v in (args.builtin, args.expr, args.table)):
        t = build_cdf(_spec(args), args.grid_n)
        return t.cdf, t.x_min, t.x_max
    if a.kind == artifact.KIND_SAMPLER:
        t = a.sampler.table
        return t.cdf, t.x_min, t.x_max
    s = np.sort(np.asarray(a.table.samples, dtype=np.float64))
    n = s.size
    return (lambda x: np.searchsorted(s, x, side="right") / n), float(s[0]), float(s[-1])


def cmd_validate(args, out):
    a = artifact.load(args.artifact)
    if args.samples:
        values = read_samples(args.samples, args.format)
    else:
        values = draw_streams(a, _seed(args), args.stream, args.count)
    cdf, lo, hi = _reference(a, args)
    d, p_ks = ks_statistic(values, cdf)
    edges = np.linspace(lo, hi, args.bins + 1)
    h = histogram(values, edges)
    g = cdf(edges)
    g[0], g[-1] = 0.0, 1.0
    expected = values.size * np.diff(g)
    # tail bins with tiny expectations make the asymptotic p-value meaningless
    po, pe = pool_bins(h.counts, expected * h.counts.sum() / max(expected.sum(), 1e-300))
    chi2, p_chi = chi_square(po, pe)
    crit = KS_COEFF / np.sqrt(values.size)
    ok = d < crit and p_chi > CHI2_MIN_P
    _report(out, count=values.size, ks_d=d, ks_p=p_ks, ks_critical=crit, chi2=chi2,
            chi2_dof=po.size - 1, chi2_p=p_chi, out_of_range=h.out_of_range,
            result="pass" if ok else "fail")
    if args.hist_out:
        with open(args.hist_out, "w") as fh:
            fh.write("bin_lo,bin_hi,count,expected\n")
            for i in range(h.counts.size):
                fh.write("%.17g,%.17g,%d,%.17g\n" % (edges[i], edges[i + 1], h.counts[i], expected[i]))
    return 0 if ok else EXIT_FAILED


def cmd_bench(args, out):
    a = artifact.load(args.artifact)
    seed = _seed(args)
    if a.kind == artifact.KIND_SAMPLER:
        modes = args.modes or [m.value for m in Mode]
        for m in modes:
            s = a.sampler.with_mode(m, args.ne)
            draw(s, UniformSource(seed), 1000, args.backend)  # compile outside the timing
            t0 = time.perf_counter()
            draw(s, UniformSource(seed), args.count, args.backend)
            dt = time.perf_counter() - t0
            print(f"mode={m} count={args.count} elapsed={dt:.6g} rate={args.count / dt:.6g} "
                  f"backend={args.backend or kernels.BACKEND}", file=out)
    else:
        t0 = time.perf_counter()
        draw_from_table(a.table, UniformSource(seed), args.count)
        dt = time.perf_counter() - t0
        print(f"mode=table count={args.count} elapsed={dt:.6g} rate={args.count / dt:.6g}", file=out)


def cmd_invert(args, out):
    spec = _spec(args)
    table = tabulate(spec.density(), spec.x_min, spec.x_max, args.grid_n)
    for y in args.y:
        roots = invert(table, y, all_roots=args.all_roots)
        print(f"y={y!r} roots=" + ",".join("%.17g" % r for r in roots), file=out)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kvrand", description="k-vector random variate generation")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", help="preprocess a distribution into a sampler artifact")
    _add_spec_flags(b)
    b.add_argument("--nd", type=count_arg, default=1000)
    b.add_argument("--grid-n", type=count_arg, default=DEFAULT_GRID_N)
    b.add_argument("--mode", choices=[m.value for m in Mode], default="direct")
    b.add_argument("--ne", type=count_arg, default=5)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    def rng_flags(q):
        q.add_argument("--seed", type=count_arg, help="default: $KVRAND_SEED, else 0")
        q.add_argument("--stream", type=count_arg, default=0)

    s = sub.add_parser("sample", help="draw samples from an artifact")
    s.add_argument("--artifact", required=True)
    s.add_argument("--count", type=count_arg, required=True)
    rng_flags(s)
    s.add_argument("--out", default="-")
    s.add_argument("--format", choices=["text", "raw64"], default="text")
    s.add_argument("--threads", type=count_arg, default=1)
    s.set_defaults(func=cmd_sample)

    lb = sub.add_parser("lut-build", help="build a pre-generated sample table")
    _add_spec_flags(lb)
    lb.add_argument("--nd", type=count_arg, default=1000)
    lb.add_argument("--dxr", type=float, required=True)
    lb.add_argument("--grid-n", type=count_arg, default=65535)
    lb.add_argument("--float32", action="store_true")
    lb.add_argument("--out", required=True)
    lb.set_defaults(func=cmd_lut_build)

    v = sub.add_parser("validate", help="KS and chi-square checks of samples against an artifact")
    _add_spec_flags(v)
    v.add_argument("--grid-n", type=count_arg, default=DEFAULT_GRID_N)
    v.add_argument("--artifact", required=True)
    v.add_argument("--samples", help="sample file; drawn from the artifact when omitted")
    v.add_argument("--format", choices=["text", "raw64"], default="text")
    v.add_argument("--count", type=count_arg, default=10 ** 6)
    rng_flags(v)
    v.add_argument("--bins", type=count_arg, default=100)
    v.add_argument("--hist-out", help="write the histogram as CSV")
    v.set_defaults(func=cmd_validate)

    be = sub.add_parser("bench", help="sampling throughput per mode")
    be.add_argument("--artifact", required=True)
    be.add_argument("--count", type=count_arg, default=10 ** 6)
    be.add_argument("--modes", nargs="+", choices=[m.value for m in Mode])
    be.add_argument("--ne", type=count_arg, default=5)
    be.add_argument("--backend", choices=kernels.available_backends())
    rng_flags(be)
    be.set_defaults(func=cmd_bench)

    iv = sub.add_parser("invert", help="roots of f(x) = y for a density f")
    _add_spec_flags(iv)
    iv.add_argument("--y", type=float, nargs="+", required=True)
    iv.add_argument("--grid-n", type=count_arg, default=DEFAULT_GRID_N)
    iv.add_argument("--all-roots", action="store_true")
    iv.set_defaults(func=cmd_invert)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = args.func(args, sys.stdout)
    except KvrandError as exc:
        print(f"kvrand: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, ArithmeticError) as exc:
        print(f"kvrand: error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"kvrand: error: {exc}", file=sys.stderr)
        return 1
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
