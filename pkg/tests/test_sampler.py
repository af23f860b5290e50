import numpy as np
import pytest

from conftest import normal_quantile
from kvrand.cdf import DistributionSpec, build_cdf
from kvrand.densities import normal_pdf
from kvrand.errors import OutOfRange
from kvrand.rng import UniformSource
from kvrand.sampler import compress, draw, draw_one, expand, inverse_at, invert_many, make_sampler, newton_polish


@pytest.fixture(scope="module")
def normal_table():
    return build_cdf(DistributionSpec.builtin("normal", -1, 1, sigma=0.2))


@pytest.fixture(scope="module")
def normal_sampler(normal_table):
    return make_sampler(normal_table, 1000, "direct")


def test_identity_grid_nodes():
    s = make_sampler(build_cdf(DistributionSpec.expression("1", 0, 1), 1001), 101)
    assert np.allclose(s.grid.x_nodes, np.linspace(0, 1, 101), atol=1e-12)
    for y in [0.0, 0.37, 0.5, 1.0]:
        assert inverse_at(s, y) == pytest.approx(y, abs=1e-12)


def test_identity_draw_returns_u(backend):
    s = make_sampler(build_cdf(DistributionSpec.expression("1", 0, 1), 101), 11, "linear")
    u = UniformSource(9).uniforms(1000)
    x = draw(s, UniformSource(9), 1000, backend).values
    assert np.allclose(x, u, atol=1e-14)


def test_reference_inversion_value(normal_sampler):
    assert inverse_at(normal_sampler, 0.2) == pytest.approx(-0.16832, abs=2e-4)
    assert abs(inverse_at(normal_sampler, 0.5)) < 1e-12


@pytest.mark.parametrize("mode", ["linear", "direct", "lagrange"])
def test_inverse_against_erfinv_oracle(normal_sampler, mode):
    s = normal_sampler.with_mode(mode)
    # the outermost intervals hold the truncated tails where no interpolant is this accurate
    y = np.linspace(0.002, 0.998, 1000)
    assert np.max(np.abs(invert_many(s, y) - normal_quantile(y))) <= 2e-4


def test_moments(normal_sampler):
    n = 10 ** 6
    x = draw(normal_sampler, UniformSource(11), n).values
    assert abs(x.mean()) < 3 * 0.2 / np.sqrt(n)
    assert abs(x.std() - 0.2) < 0.01 * 0.2


def test_linear_and_direct_bit_identical(normal_sampler, backend):
    a = draw(normal_sampler.with_mode("linear"), UniformSource(5, 2), 200_000, backend).values
    b = draw(normal_sampler.with_mode("direct"), UniformSource(5, 2), 200_000, backend).values
    assert np.array_equal(a, b)


@pytest.mark.parametrize("mode", ["linear", "direct", "lagrange"])
def test_backends_bit_identical(normal_sampler, mode):
    y = UniformSource(1).uniforms(100_000)
    s = normal_sampler.with_mode(mode)
    outs = [invert_many(s, y, b) for b in ("numba", "numpy") if b in __import__("kvrand").kernels.available_backends()]
    assert all(np.array_equal(outs[0], o) for o in outs)


@pytest.mark.parametrize("mode", ["linear", "direct", "lagrange"])
def test_monotone_sweep(normal_sampler, mode):
    x = invert_many(normal_sampler.with_mode(mode), np.linspace(0, 1, 100_001))
    assert np.all(np.diff(x) >= 0)
    assert x[0] == -1.0 and x[-1] == 1.0


def test_lagrange_more_accurate(normal_table):
    s = make_sampler(normal_table, 100, "linear")
    y = UniformSource(3).uniforms(1000)
    ref = normal_quantile(y)
    lin = np.median(np.abs(invert_many(s, y) - ref))
    lag = np.median(np.abs(invert_many(s.with_mode("lagrange", 5), y) - ref))
    assert lag <= lin


def test_determinism(normal_sampler):
    a = draw(normal_sampler, UniformSource(42, 7), 1000).values
    b = draw(normal_sampler, UniformSource(42, 7), 1000).values
    c = draw(normal_sampler, UniformSource(42, 8), 1000).values
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    batch = draw(normal_sampler, UniformSource(42, 7), 10)
    assert (batch.seed, batch.stream, batch.count) == (42, 7, 10)
    assert draw(normal_sampler, UniformSource(1), 0).values.size == 0
    assert draw_one(normal_sampler, UniformSource(42, 7)) == a[0]


def test_chunked_draw_matches_single(normal_sampler, monkeypatch):
    import kvrand.sampler as sm
    a = draw(normal_sampler, UniformSource(4), 5000).values
    monkeypatch.setattr(sm, "CHUNK", 777)
    b = draw(normal_sampler, UniformSource(4), 5000).values
    assert np.array_equal(a, b)


def test_out_of_range(normal_sampler):
    with pytest.raises(OutOfRange):
        inverse_at(normal_sampler, 1.5)
    with pytest.raises(OutOfRange):
        invert_many(normal_sampler, [0.5, np.nan])


def test_lagrange_n_e_checks(normal_sampler):
    with pytest.raises(ValueError):
        normal_sampler.with_mode("lagrange", 1)
    with pytest.raises(ValueError):
        normal_sampler.with_mode("lagrange", 5000)


def test_excised_region_never_sampled():
    spec = DistributionSpec.tabulated([0, 1, 1.0001, 1.9999, 2, 3], [1, 1, 0, 0, 1, 1])
    t = build_cdf(spec, 30_001)
    for mode in ("direct", "lagrange"):
        s = make_sampler(t, 1000, mode)
        assert len(s.excised) == 1
        x = draw(s, UniformSource(8), 10 ** 6).values
        lo, hi = s.excised[0]
        assert not np.any((x > lo) & (x < hi))
        assert 0.45 < np.mean(x < 1.5) < 0.55
        assert x.min() >= 0 and x.max() <= 3


def test_compress_expand_roundtrip():
    starts = np.array([1.0, 2.0])
    widths = np.array([0.5, 0.25])
    x = np.array([0.0, 1.0, 1.5, 2.0, 2.5, 2.75, 3.0])
    xc = compress(x, starts, widths)
    assert np.allclose(xc, [0, 1, 1, 1.5, 2, 2, 2.25])
    assert np.allclose(expand([0.0, 1.0, 1.2, 2.0, 2.1], starts, widths), [0, 1, 1.7, 2.5, 2.85])


def test_newton_polish_improves(normal_table):
    s = make_sampler(normal_table, 100, "linear")
    y = np.linspace(0.05, 0.95, 101)
    x0 = invert_many(s, y)
    x1 = newton_polish(s, x0, y, lambda x: normal_pdf(x, 0, 0.2), iterations=3)
    ref = normal_quantile(y)
    assert np.max(np.abs(x1 - ref)) < 1e-6 < np.max(np.abs(x0 - ref))
