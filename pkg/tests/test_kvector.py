import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kvrand.errors import InvalidRange, NonFiniteValue, TooFewElements
from kvrand.kvector import EPS, build_kvector, build_sorted_database, range_query


def brute(values, a, b):
    return set(np.flatnonzero((values >= a) & (values <= b)).tolist())


def test_sorted_database_small():
    db = build_sorted_database([3, 1, 2])
    assert db.values.tolist() == [1, 2, 3]
    # 0-based internally; 1-based view is [2, 3, 1]
    assert (db.sort_index + 1).tolist() == [2, 3, 1]


def test_sorted_database_duplicates_stable():
    db = build_sorted_database([5, 5, 5])
    assert db.sort_index.tolist() == [0, 1, 2]


def test_sorted_database_random_matches_sort():
    y = np.random.default_rng(0).random(1000)
    db = build_sorted_database(y)
    assert np.array_equal(db.values, sorted(y))
    assert np.array_equal(db.original[db.sort_index], db.values)


def test_sorted_database_errors():
    with pytest.raises(TooFewElements):
        build_sorted_database([1.0])
    with pytest.raises(NonFiniteValue) as e:
        build_sorted_database([1.0, np.nan, 2.0])
    assert e.value.position == 1


def test_kvector_linear_data():
    db = build_sorted_database(np.arange(10.0))
    kv = build_kvector(db)
    assert kv.k[0] == 0 and kv.k[-1] == 10
    assert kv.m > 0
    # each level is within a few eps of an integer, so k(t) is t or t + 1
    t = np.arange(1, 9)
    assert np.all((kv.k[1:-1] == t) | (kv.k[1:-1] == t + 1))


def test_kvector_counts_match_scan():
    rng = np.random.default_rng(1)
    y = rng.normal(size=500)
    db = build_sorted_database(y)
    kv = build_kvector(db)
    levels = kv.q + kv.m * np.arange(db.n)
    scan = np.array([(db.values <= lv).sum() for lv in levels])
    scan[0], scan[-1] = 0, db.n
    assert np.array_equal(kv.k, scan)
    assert kv.delta_eps == pytest.approx((db.n - 1) * EPS * max(1, abs(y).max()), rel=1e-12)


def test_kvector_degenerate_database():
    db = build_sorted_database([2.0, 2.0, 2.0, 2.0])
    kv = build_kvector(db)
    assert kv.m > 0
    assert range_query(kv, db, 2.0, 2.0).indices.size == 4
    assert range_query(kv, db, 2.5, 3.0).indices.size == 0


def test_range_examples():
    db = build_sorted_database(np.arange(10.0))
    kv = build_kvector(db)
    r = range_query(kv, db, 2.5, 5.5)
    assert sorted(db.original[r.indices]) == [3, 4, 5]
    assert range_query(kv, db, 0.0, 9.0).indices.size == 10
    assert range_query(kv, db, 20.0, 30.0).indices.size == 0
    assert range_query(kv, db, -30.0, -20.0).indices.size == 0
    with pytest.raises(InvalidRange):
        range_query(kv, db, 2.0, 1.0)


def test_nonstrict_is_superset_of_adjacent():
    rng = np.random.default_rng(2)
    y = rng.random(2000)
    db = build_sorted_database(y)
    kv = build_kvector(db)
    for _ in range(200):
        a, b = np.sort(rng.random(2))
        strict = range_query(kv, db, a, b)
        loose = range_query(kv, db, a, b, strict=False)
        assert loose.start <= strict.start and strict.stop <= loose.stop
        assert set(strict.indices.tolist()) <= set(loose.indices.tolist())


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False), min_size=2, max_size=200),
    st.floats(-2e6, 2e6), st.floats(0, 2e6),
)
def test_range_query_matches_brute_force(values, a, width):
    y = np.array(values)
    db = build_sorted_database(y)
    kv = build_kvector(db)
    assert np.all(np.diff(kv.k) >= 0) and kv.k.min() >= 0 and kv.k.max() <= db.n
    got = set(range_query(kv, db, a, a + width).indices.tolist())
    assert got == brute(y, a, a + width)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=2, max_size=50), st.integers(-6, 6), st.integers(0, 4))
def test_range_query_with_ties(values, a, width):
    # integer data puts query bounds exactly on element values
    y = np.array(values, dtype=float)
    db = build_sorted_database(y)
    kv = build_kvector(db)
    got = set(range_query(kv, db, float(a), float(a + width)).indices.tolist())
    assert got == brute(y, a, a + width)


def test_range_query_on_large_magnitudes():
    y = np.array([1e300, -1e300, 0.0, 5e299])
    db = build_sorted_database(y)
    kv = build_kvector(db)
    assert set(range_query(kv, db, 0.0, 1e300).indices.tolist()) == {0, 2, 3}
