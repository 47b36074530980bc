import itertools
from math import comb

import pytest

from sgfem.multi_index import build_multi_index_set, hierarchy_dims


def brute_force_set(dims, degree):
    """Independent enumeration: all tuples with total degree <= degree."""
    return {t for t in itertools.product(range(degree + 1), repeat=dims)
            if sum(t) <= degree}


@pytest.mark.parametrize("dims,degree", [(1, 0), (1, 5), (2, 2), (3, 4), (4, 4), (6, 3)])
def test_cardinality_and_content(dims, degree):
    s = build_multi_index_set(dims, degree)
    assert len(s) == comb(dims + degree, degree)
    assert set(s.indices) == brute_force_set(dims, degree)


def test_documented_sizes():
    assert len(build_multi_index_set(4, 4)) == 70
    assert build_multi_index_set(1, 0).indices == ((0,),)


def test_n2_p2_layout():
    s = build_multi_index_set(2, 2)
    assert len(s) == 6
    assert s.degree_offsets[:3] == (0, 1, 3)
    assert s.indices[0] == (0, 0)
    # reverse-lexicographic inside each degree
    assert s.indices[1:3] == ((1, 0), (0, 1))
    assert s.indices[3:] == ((2, 0), (1, 1), (0, 2))


def test_graded_ordering():
    s = build_multi_index_set(3, 5)
    degs = s.degrees()
    assert degs == sorted(degs)
    for l in range(6):
        sl = s.degree_slice(l)
        level = s.indices[sl]
        assert all(sum(t) == l for t in level)
        assert list(level) == sorted(level, reverse=True)


@pytest.mark.parametrize("dims,degree", [(2, 3), (4, 4), (5, 2)])
def test_prefix_property(dims, degree):
    full = build_multi_index_set(dims, degree)
    sub = build_multi_index_set(dims, degree - 1)
    assert full.indices[:len(sub)] == sub.indices
    assert full.truncated(degree - 1).indices == sub.indices


def test_first_order_positions():
    s = build_multi_index_set(4, 3)
    for d in range(1, 5):
        pos = s.first_order_position(d)
        assert s.indices[pos] == tuple(1 if i == d - 1 else 0 for i in range(4))
    # first-order indices are consecutive, in dimension order
    assert [s.first_order_position(d) for d in range(1, 5)] == [1, 2, 3, 4]


def test_position_roundtrip():
    s = build_multi_index_set(3, 3)
    for i, t in enumerate(s.indices):
        assert s.position(t) == i


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        build_multi_index_set(0, 3)
    with pytest.raises(ValueError):
        build_multi_index_set(2, -1)
    with pytest.raises(ValueError):
        build_multi_index_set(40, 40)   # comb(80, 40) overflows any index range


def test_hierarchy_dims():
    assert hierarchy_dims(4, 4) == [1, 5, 15, 35, 70]
    assert hierarchy_dims(1, 3) == [1, 2, 3, 4]
    assert hierarchy_dims(4, 1) == [1, 5]
    with pytest.raises(ValueError):
        hierarchy_dims(0, 1)


def test_hierarchy_matches_offsets():
    s = build_multi_index_set(3, 4)
    dims = hierarchy_dims(3, 4)
    assert list(s.degree_offsets[1:]) == dims
