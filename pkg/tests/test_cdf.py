import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from kvrand.cdf import DistributionSpec, build_cdf, excise_plateaus, read_table
from kvrand.errors import AllZeroDensity, DensityEvaluationError, TableFormatError
from kvrand.kvector import EPS

TWO_PI = 2 * np.pi


def test_uniform_density():
    t = build_cdf(DistributionSpec.expression("1", 0, 1), 11)
    assert np.allclose(t.g_values, np.linspace(0, 1, 11), atol=1e-15)
    assert t.shift == 0.0


def test_builtin_normal_matches_erf():
    t = build_cdf(DistributionSpec.builtin("normal", -1, 1, sigma=0.2), 100_000)
    x = t.x_nodes
    phi = 0.5 * (1 + special.erf(x / (0.2 * np.sqrt(2))))
    ref = (phi - phi[0]) / (phi[-1] - phi[0])
    assert np.max(np.abs(t.g_values - ref)) <= 1e-10


def test_quadrature_path_normal():
    # same density through the expression parser goes through the trapezoid sum
    t = build_cdf(DistributionSpec.expression("exp(-0.5*(x/0.2)^2)", -1, 1), 100_001)
    x = t.x_nodes
    phi = 0.5 * (1 + special.erf(x / (0.2 * np.sqrt(2))))
    ref = (phi - phi[0]) / (phi[-1] - phi[0])
    assert np.max(np.abs(t.g_values - ref)) <= 1e-9


def test_sign_changing_density_against_simpson():
    n = 10_001
    t = build_cdf(DistributionSpec.expression("sin(x)+cos(5*x)", -TWO_PI, TWO_PI), n)
    assert t.z_min < 0 and t.shift == -t.z_min
    xf = np.linspace(-TWO_PI, TWO_PI, 10 * (n - 1) + 1)
    cum = integrate.cumulative_simpson(np.sin(xf) + np.cos(5 * xf) + t.shift, x=xf, initial=0)
    ref = (cum / cum[-1])[::10]
    assert np.all(np.diff(t.g_values) >= 0)
    assert np.max(np.abs(t.g_values - ref)) < 1e-6


def test_derivative_tracks_density():
    t = build_cdf(DistributionSpec.builtin("normal", -1, 1, sigma=0.2), 20_001)
    scale = t.gstar_max - t.gstar_min
    mid = 0.5 * (t.x_nodes[1:] + t.x_nodes[:-1])
    fd = np.diff(t.g_values) / np.diff(t.x_nodes) * scale
    pdf = np.exp(-0.5 * (mid / 0.2) ** 2) / (0.2 * np.sqrt(2 * np.pi))
    assert np.max(np.abs(fd - pdf)) < 10 * t.delta_x ** 2 * 200


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 5), st.floats(-2, 2), st.integers(50, 2000))
def test_random_densities_monotone_and_normalized(a, w, c, n):
    spec = DistributionSpec.expression(f"{c}+sin({w}*x)*x-{a}", -2, 3)
    t = build_cdf(spec, n)
    assert np.all(np.diff(t.g_values) >= 0)
    assert abs(t.g_values[0]) <= 4 * EPS and abs(t.g_values[-1] - 1) <= 4 * EPS
    assert t.shift == max(0.0, -t.z_min)


def test_errors():
    with pytest.raises(AllZeroDensity):
        build_cdf(DistributionSpec.expression("0", 0, 1), 11)
    with pytest.raises(DensityEvaluationError):
        build_cdf(DistributionSpec.expression("ln(x)", -1, 1), 11)
    with pytest.raises(ValueError):
        DistributionSpec.expression("x", 1, 0)


def test_excision_zero_gap():
    spec = DistributionSpec.expression("(abs(x-0.5)-0.1+abs(abs(x-0.5)-0.1))", 0, 1)
    t = excise_plateaus(build_cdf(spec, 1001))
    assert len(t.excised) == 1
    lo, hi = t.excised[0]
    assert lo <= 0.4 + 1e-9 and hi >= 0.6 - 1e-9
    assert np.all(np.diff(t.g_values) >= 16 * EPS)


def test_excision_noop_for_positive_density():
    t = build_cdf(DistributionSpec.builtin("normal", -1, 1, sigma=0.2), 1001)
    assert excise_plateaus(t) is t


def test_excised_edges_at_domain_ends():
    spec = DistributionSpec.tabulated([0, 0.3, 0.31, 0.69, 0.7, 1], [0, 0, 1, 1, 0, 0])
    t = excise_plateaus(build_cdf(spec, 1001))
    assert len(t.excised) == 2
    assert t.excised[0][0] == 0.0 and t.excised[-1][1] == 1.0


def test_read_table(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("# x pdf\n0, 1\n0.5 1  # mid\n\n1,1\n")
    spec = read_table(p)
    assert spec.x_min == 0 and spec.x_max == 1
    t = build_cdf(spec, 11)
    assert np.allclose(t.g_values, np.linspace(0, 1, 11))
    p.write_text("0 1\n1\n")
    with pytest.raises(TableFormatError):
        read_table(p)
    p.write_text("0 1\n0 2\n")
    with pytest.raises(TableFormatError):
        read_table(p)
    p.write_text("0 1\n1 abc\n")
    with pytest.raises(TableFormatError):
        read_table(p)
