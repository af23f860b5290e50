import struct

import numpy as np
import pytest

from kvrand import artifact
from kvrand.cdf import DistributionSpec, build_cdf
from kvrand.errors import BadArtifact
from kvrand.inversion import tabulate
from kvrand.lut import LevelPlan, build_sample_table
from kvrand.rng import UniformSource
from kvrand.sampler import draw, make_sampler


@pytest.fixture(scope="module")
def normal_sampler():
    return make_sampler(build_cdf(DistributionSpec.builtin("normal", -1, 1, sigma=0.2)), 1000)


@pytest.fixture(scope="module")
def gapped_sampler():
    # zero density on (-0.5, 0.5) leaves a plateau in the CDF
    x = np.linspace(-2, 2, 4001)
    spec = DistributionSpec.tabulated(x, np.where(np.abs(x) > 0.5, 1 + x * x, 0.0))
    return make_sampler(build_cdf(spec), 400, "lagrange", 4)


@pytest.mark.parametrize("name", ["normal_sampler", "gapped_sampler"])
def test_sampler_round_trip_byte_exact(name, request):
    s = request.getfixturevalue(name)
    data = artifact.sampler_bytes(s)
    a = artifact.from_bytes(data)
    assert a.kind == artifact.KIND_SAMPLER
    assert artifact.to_bytes(a) == data
    assert a.sampler.mode == s.mode and a.sampler.n_e == s.n_e
    assert a.excised == s.excised
    x1 = draw(s, UniformSource(7, 2), 5000).values
    x2 = draw(a.sampler, UniformSource(7, 2), 5000).values
    assert np.array_equal(x1, x2)


def test_gapped_sampler_avoids_gap(gapped_sampler):
    assert len(gapped_sampler.excised) == 1
    lo, hi = gapped_sampler.excised[0]
    assert lo == pytest.approx(-0.5, abs=1e-3) and hi == pytest.approx(0.5, abs=1e-3)
    x = draw(gapped_sampler, UniformSource(1), 100_000).values
    assert not np.any((x > lo + 1e-9) & (x < hi - 1e-9))


@pytest.mark.parametrize("f32", [False, True])
def test_table_round_trip(f32, tmp_path):
    t = build_sample_table(LevelPlan(20, 0.01, tabulate(lambda x: np.exp(-x * x), -2, 2, 801)), float32=f32)
    p = tmp_path / "t.kvrd"
    artifact.save_table(p, t, -2.0, 2.0, 0.01)
    a = artifact.load(p)
    assert a.table.samples.dtype == (np.float32 if f32 else np.float64)
    assert np.array_equal(a.table.samples, t.samples)
    assert np.array_equal(a.table.per_level_counts, t.per_level_counts)
    assert artifact.to_bytes(a) == p.read_bytes()


def test_rejects_corruption(normal_sampler, tmp_path):
    data = artifact.sampler_bytes(normal_sampler)
    with pytest.raises(BadArtifact, match="magic"):
        artifact.from_bytes(b"XXXX" + data[4:])
    with pytest.raises(BadArtifact, match="version"):
        artifact.from_bytes(data[:4] + struct.pack("<H", 99) + data[6:])
    with pytest.raises(BadArtifact):
        artifact.from_bytes(data[:-8])
    with pytest.raises(BadArtifact):
        artifact.from_bytes(data + b"\0")
    with pytest.raises(BadArtifact):
        artifact.from_bytes(data[:10])
    with pytest.raises(BadArtifact, match="kind"):
        artifact.from_bytes(data[:6] + bytes([9]) + data[7:])
    # a perturbed node no longer reproduces the stored inverse line
    bad = bytearray(data)
    off = artifact._HEADER.size + 8 * (normal_sampler.grid.n + 10)
    bad[off:off + 8] = struct.pack("<d", 0.5)
    with pytest.raises(BadArtifact):
        artifact.from_bytes(bytes(bad))
    with pytest.raises(BadArtifact):
        artifact.load(tmp_path / "missing.kvrd")
    assert BadArtifact("x").exit_code == 2
