import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tgcntrack import association as assoc
from tgcntrack import kalman
from tgcntrack.core import BoundingBox, Detection, InvalidWeights, Velocity


def test_motion_distance_examples():
    z = BoundingBox.from_center(1.0, 2.0, 3.0, 4.0)
    assert assoc.motion_distance((np.array([1.0, 2.0, 3.0, 4.0]), np.eye(4)), z) == 0.0
    # the residual is taken in measurement space, so build z from the offset mean
    base = BoundingBox.from_center(0.0, 0.0, 1.0, 1.0).to_cxcywh()
    assert assoc.motion_distance((base - [1, 2, 0, 0], np.eye(4)), BoundingBox.from_center(0, 0, 1, 1)) == 5.0
    assert assoc.motion_distance((base - [2, 0, 0, 0], np.diag([4.0, 1, 1, 1])),
                                 BoundingBox.from_center(0, 0, 1, 1)) == 1.0


@pytest.mark.parametrize("v1, v2, expected", [
    ((3, 4), (3, 4), 0.0),
    ((1, 0), (-1, 0), 2.0),
    ((1, 0), (0, 1), 1.0),
    ((0, 0), (1, 1), 1.0),
])
def test_velocity_distance(v1, v2, expected):
    assert assoc.velocity_distance(Velocity(*v1), Velocity(*v2)) == pytest.approx(expected, abs=1e-15)


def test_appearance_distance():
    assert assoc.appearance_distance([0.3, 0.4], [0.3, 0.4]) == pytest.approx(0.0, abs=1e-15)
    assert assoc.appearance_distance([1, 0, 0], [0, 1, 0]) == 1.0
    assert assoc.appearance_distance([1, 1], [1, 0]) == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-15)
    assert assoc.appearance_distance([0, 0], [1, 0]) == 1.0


def test_combined_cost():
    assert assoc.combined_cost(2, 1, 4, 1, 0) == 2
    assert assoc.combined_cost(2, 1, 4, 0, 0) == 4
    assert assoc.combined_cost(2, 1, 4, 0.5, 0.25) == 2.25


@pytest.mark.parametrize("l1, l2", [(-0.1, 0.2), (0.8, 0.3), (0.5, math.nan)])
def test_invalid_weights(l1, l2):
    with pytest.raises(InvalidWeights):
        assoc.combined_cost(1, 1, 1, l1, l2)


def test_gate():
    c = assoc.CostMatrix(np.ones((2, 2)))
    assert not assoc.gate(c, [[1, 12], [3, 5]], math.inf).gated.any()
    assert assoc.gate(c, [[1, 12], [3, 5]], 0).gated.all()
    np.testing.assert_array_equal(assoc.gate(c, [[1, 12], [3, 5]], 9.4877).gated, [[False, True], [False, False]])


def test_hungarian_examples():
    res = assoc.hungarian(assoc.CostMatrix([[1.0, 2.0], [2.0, 1.0]]))
    assert res.matches == [(0, 0), (1, 1)]
    empty = assoc.hungarian(assoc.CostMatrix.empty(0, 3))
    assert empty.matches == [] and empty.unmatched_detections == [0, 1, 2]


def test_hungarian_skips_gated():
    c = assoc.CostMatrix([[0.1, 5.0], [0.2, 0.3]], gated=[[False, True], [True, True]])
    res = assoc.hungarian(c)
    assert res.matches == [(0, 0)]
    assert res.unmatched_tracks == [1] and res.unmatched_detections == [1]


def moving_state(cx, cy, vx, vy, w=20.0, h=40.0):
    s = kalman.initiate(Detection(1, BoundingBox.from_center(cx - vx, cy - vy, w, h)))
    return kalman.KalmanState(np.array([cx, cy, w, h, vx, vy]), s.covariance)


def test_associate_exact_single_match():
    state = moving_state(50, 60, 2, 1)
    feat = np.array([1.0, 0.0])
    det = Detection(1, BoundingBox.from_center(50, 60, 20, 40), 1.0, feat)
    d1, d2, d3 = assoc.distance_matrices([(state, feat)], [det])
    assert d1[0, 0] == pytest.approx(0, abs=1e-12)
    assert d2[0, 0] == pytest.approx(0, abs=1e-12)
    assert d3[0, 0] == pytest.approx(0, abs=1e-12)
    assert assoc.associate([(state, feat)], [det]).matches == [(0, 0)]


def test_associate_all_gated():
    state = moving_state(0, 0, 0, 0)
    feat = np.array([1.0, 0.0])
    det = Detection(1, BoundingBox.from_center(500, 500, 20, 40), 1.0, feat)
    res = assoc.associate([(state, feat)], [det])
    assert res.matches == [] and res.unmatched_tracks == [0] and res.unmatched_detections == [0]


def test_cost_ceiling_rejects_expensive_pair():
    state = moving_state(0, 0, 2, 0)
    det = Detection(1, BoundingBox.from_center(0, 0, 20, 40), 1.0, np.array([-1.0, 0.0]))
    track = (state, np.array([1.0, 0.0]))
    assert assoc.associate([track], [det], 0.0, 0.0, cost_ceiling=1.0).matches == []
    assert assoc.associate([track], [det], 0.0, 0.0, cost_ceiling=2.5).matches == [(0, 0)]


def test_implied_velocity():
    s = moving_state(10, 10, 3, -1)
    assert assoc.implied_velocity(s, BoundingBox.from_center(10, 10, 20, 40)) == Velocity(3.0, -1.0)


pos = st.floats(0.01, 100)
vec = st.tuples(st.floats(-50, 50), st.floats(-50, 50)).filter(lambda v: math.hypot(*v) > 1e-3)


@given(vec, vec, pos)
def test_velocity_distance_scale_invariant(a, b, alpha):
    base = assoc.velocity_distance(Velocity(*a), Velocity(*b))
    assert 0.0 <= base <= 2.0
    assert assoc.velocity_distance(Velocity(a[0] * alpha, a[1] * alpha), Velocity(*b)) == pytest.approx(base, abs=1e-9)
    assert assoc.velocity_distance(Velocity(*a), Velocity(b[0] * alpha, b[1] * alpha)) == pytest.approx(base, abs=1e-9)


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3),
       st.lists(st.floats(-5, 5), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3), pos)
def test_appearance_distance_scale_invariant(a, b, alpha):
    base = assoc.appearance_distance(a, b)
    assert 0.0 <= base <= 2.0
    assert assoc.appearance_distance(np.multiply(a, alpha), b) == pytest.approx(base, abs=1e-9)


weights = st.tuples(st.floats(0, 1), st.floats(0, 1)).filter(lambda w: w[0] + w[1] <= 1)
dist = st.floats(0, 100)


@given(weights, dist, dist, dist, st.floats(0, 10), st.integers(0, 2))
def test_combined_cost_monotone(w, d1, d2, d3, bump, which):
    ds = [d1, d2, d3]
    up = list(ds)
    up[which] += bump
    assert assoc.combined_cost(*up, *w) >= assoc.combined_cost(*ds, *w) - 1e-12


@given(st.integers(0, 6), st.integers(0, 6), st.integers(0, 2**31))
def test_result_partitions_indices(n, m, seed):
    rng = np.random.default_rng(seed)
    values = rng.uniform(0, 1, (n, m))
    gated = rng.random((n, m)) < 0.4
    res = assoc.hungarian(assoc.CostMatrix(values, gated))
    rows = [i for i, _ in res.matches] + res.unmatched_tracks
    cols = [j for _, j in res.matches] + res.unmatched_detections
    assert sorted(rows) == list(range(n))
    assert sorted(cols) == list(range(m))
    assert all(not gated[i, j] for i, j in res.matches)
