import pytest
from hypothesis import given
from hypothesis import strategies as st

from fannet.errors import DimensionMismatch, GridTooLarge, SingletonBox
from fannet.noise import NoiseBox, NoiseSpec, apply_noise, grid_chunks, grid_iterator, split_box

from oracles import naive_noise


@pytest.mark.parametrize(
    "x, nv, expected",
    [
        ([100, 50], [11, -11], [111.0, 44.5]),
        ([0, 7], [50, 0], [0.0, 7.0]),
        ([2, 1], [-50, 100], [1.0, 2.0]),
    ],
)
def test_apply_noise(x, nv, expected):
    assert apply_noise(x, nv).tolist() == expected


def test_apply_noise_dimension():
    with pytest.raises(DimensionMismatch):
        apply_noise([1.0, 2.0], [1])


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=6), st.data())
def test_apply_noise_matches_scalar_formula(x, data):
    nv = data.draw(st.lists(st.integers(-100, 100), min_size=len(x), max_size=len(x)))
    assert apply_noise(x, nv).tolist() == naive_noise(x, nv)
    assert apply_noise(x, [0] * len(x)).tolist() == [float(v) for v in x]


def test_grid_symmetric_one():
    pts = list(grid_iterator(NoiseSpec.symmetric(1, 2)))
    assert len(pts) == 9
    assert pts[0] == (-1, -1) and pts[-1] == (1, 1)
    assert pts == sorted(pts)


def test_grid_zero():
    assert list(grid_iterator(NoiseSpec.symmetric(0, 6))) == [(0,) * 6]


def test_grid_one_sided_six_nodes():
    pts = list(grid_iterator(NoiseSpec(((0, 1),) * 6)))
    assert len(pts) == len(set(pts)) == 64


def test_grid_too_large():
    with pytest.raises(GridTooLarge):
        grid_iterator(NoiseSpec.symmetric(100, 10))


@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(0, 3)), min_size=1, max_size=4))
def test_grid_cardinality_and_chunks(raw):
    spec = NoiseSpec(tuple((lo, lo + w) for lo, w in raw))
    pts = list(grid_iterator(spec))
    assert len(set(pts)) == len(pts) == spec.cardinality()
    chunked = [tuple(int(v) for v in row) for c in grid_chunks(spec, chunk=7) for row in c]
    assert chunked == pts


@given(st.integers(0, 4), st.integers(1, 3))
def test_grid_nesting(delta, n):
    small = set(grid_iterator(NoiseSpec.symmetric(delta, n)))
    big = set(grid_iterator(NoiseSpec.symmetric(delta + 1, n)))
    assert small < big


@pytest.mark.parametrize(
    "box, left, right",
    [
        ([(-2, 2)], [(-2, 0)], [(1, 2)]),
        ([(0, 1), (-5, 5)], [(0, 1), (-5, 0)], [(0, 1), (1, 5)]),
        ([(3, 3), (0, 1)], [(3, 3), (0, 0)], [(3, 3), (1, 1)]),
    ],
)
def test_split_box(box, left, right):
    lhs, rhs = split_box(NoiseBox.from_intervals(box))
    assert lhs.intervals == left and rhs.intervals == right


def test_split_singleton():
    with pytest.raises(SingletonBox):
        split_box(NoiseBox((1, 2), (1, 2)))


@given(st.lists(st.tuples(st.integers(-6, 6), st.integers(0, 5)), min_size=1, max_size=4))
def test_split_partitions(raw):
    box = NoiseBox.from_intervals([(lo, lo + w) for lo, w in raw])
    if box.is_singleton():
        return
    left, right = split_box(box)
    assert left.size() + right.size() == box.size()
    pts = set(grid_iterator(box.spec()))
    lpts, rpts = set(grid_iterator(left.spec())), set(grid_iterator(right.spec()))
    assert lpts.isdisjoint(rpts) and lpts | rpts == pts


def test_parse_ranges_roundtrip():
    spec = NoiseSpec.parse_ranges("0:1,-3:2")
    assert spec.ranges == ((0, 1), (-3, 2))
    assert NoiseSpec.parse_ranges(spec.encode()) == spec
    assert NoiseSpec.symmetric(4, 3).encode() == "4"
