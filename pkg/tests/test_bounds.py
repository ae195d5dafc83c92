import numpy as np
import pytest

from fannet.bounds import BoundsVector, _add, _mul, propagate_batch, propagate_bounds
from fannet.network import forward_batch

from conftest import random_net


def test_degenerate_box_is_exact(t1):
    out = propagate_bounds(t1, BoundsVector([2.0, 1.0], [2.0, 1.0]))
    assert out.lo.tolist() == [1.0, -1.0]
    assert out.hi.tolist() == [1.0, -1.0]


def test_t1_box(t1):
    out = propagate_bounds(t1, BoundsVector([1.0, 0.0], [3.0, 2.0]))
    assert out.lo.tolist() == [-1.0, -3.0]
    assert out.hi.tolist() == [3.0, 1.0]


def test_t1_box_sampling_cross_check(t1):
    rng = np.random.default_rng(0)
    xs = np.column_stack([rng.uniform(1, 3, 10_000), rng.uniform(0, 2, 10_000)])
    outs = forward_batch(t1, xs)
    # hand-derived extremes are approached by the samples
    assert outs[:, 0].min() == pytest.approx(-1.0, abs=0.05)
    assert outs[:, 0].max() == pytest.approx(3.0, abs=0.05)
    assert outs[:, 1].min() == pytest.approx(-3.0, abs=0.05)
    assert outs[:, 1].max() == pytest.approx(1.0, abs=0.05)


def test_directed_rounding_brackets_inexact_ops():
    a = np.array([0.1, 1e16, 3.0])
    b = np.array([0.2, 1.0, 1e-17])
    lo, hi = _add(a, b, -1), _add(a, b, 1)
    exact = [0.1 + 0.2, 1e16 + 1.0, 3.0 + 1e-17]
    assert (lo <= exact).all() and (np.array(exact) <= hi).all()
    # 0.1 + 0.2 is inexact: the bounds must straddle the true sum
    assert lo[0] < hi[0]
    p_lo, p_hi = _mul(np.array([0.1]), np.array([3.0]), -1), _mul(np.array([0.1]), np.array([3.0]), 1)
    assert p_lo[0] < p_hi[0]
    assert _mul(np.array([0.5]), np.array([4.0]), -1)[0] == 2.0 == _mul(np.array([0.5]), np.array([4.0]), 1)[0]


def test_bounds_contain_random_points():
    rng = np.random.default_rng(5)
    for _ in range(200):
        net = random_net(rng, [3, 4, 2])
        centre = rng.uniform(-2, 2, 3)
        width = rng.uniform(0, 1, 3)
        lo, hi = propagate_batch(net, (centre - width)[None], (centre + width)[None])
        pts = rng.uniform(centre - width, centre + width, (1000, 3))
        outs = forward_batch(net, pts)
        assert (outs >= lo).all() and (outs <= hi).all()
