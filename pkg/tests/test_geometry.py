import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from vinedesign.errors import ZeroVector
from vinedesign.geometry import (
    Clamp,
    Cylinder,
    Frame,
    Segment3,
    angle_between,
    frame_compose,
    point_segment_distance,
    point_segment_distance_batch,
    segment_cylinder_intersects,
    segment_cylinder_intersects_batch,
    steer_rotation,
)

coord = st.floats(-200, 200, allow_nan=False)
point = st.tuples(coord, coord, coord).map(np.array)
angle = st.floats(-math.pi, math.pi, allow_nan=False)


def homogeneous(tx, ty, length):
    """4x4 transform: rotate about x, then about y, then translate along the new z."""
    rx = np.eye(4)
    rx[1:3, 1:3] = [[math.cos(tx), -math.sin(tx)], [math.sin(tx), math.cos(tx)]]
    ry = np.eye(4)
    ry[0, 0], ry[0, 2], ry[2, 0], ry[2, 2] = math.cos(ty), math.sin(ty), -math.sin(ty), math.cos(ty)
    tz = np.eye(4)
    tz[2, 3] = length
    return rx @ ry @ tz


def sampled_distance(p, a, b, samples=10**6):
    """Minimum of |p - (a + t(b - a))| over a uniform grid of t, via the expanded quadratic."""
    d = b - a
    e = a - p
    t = np.linspace(0.0, 1.0, samples)
    sq = (d @ d) * t * t + 2.0 * (e @ d) * t + e @ e
    return math.sqrt(max(sq.min(), 0.0))


def depth(points, c: Cylinder):
    """Signed depth inside the closed cylinder (> 0 inside, 0 on the boundary)."""
    rel = points - c.base_center
    radial = c.radius - np.hypot(rel[:, 0], rel[:, 1])
    return np.minimum(radial, np.minimum(rel[:, 2], c.height - rel[:, 2]))


class TestPointSegment:
    seg = Segment3(np.array([0.0, 0, 0]), np.array([0.0, 0, 10]))

    @pytest.mark.parametrize(
        "p, dist, closest, flag",
        [
            ((0, 0, 5), 0.0, (0, 0, 5), Clamp.INTERIOR),
            ((1, 0, 5), 1.0, (0, 0, 5), Clamp.INTERIOR),
            ((3, 4, 20), math.sqrt(125), (0, 0, 10), Clamp.AT_B),
            ((0, 1, -3), math.sqrt(10), (0, 0, 0), Clamp.AT_A),
        ],
    )
    def test_examples(self, p, dist, closest, flag):
        d, c, f = point_segment_distance(np.array(p, float), self.seg)
        assert d == pytest.approx(dist, abs=1e-12)
        np.testing.assert_allclose(c, closest, atol=1e-12)
        assert f is flag

    def test_far_example_against_sampling(self):
        p = np.array([3.0, 4.0, 20.0])
        assert point_segment_distance(p, self.seg)[0] == pytest.approx(
            sampled_distance(p, self.seg.a, self.seg.b), abs=1e-9
        )

    def test_degenerate_segment(self):
        s = Segment3(np.array([1.0, 1, 1]), np.array([1.0, 1, 1]))
        d, c, f = point_segment_distance(np.array([1.0, 1, 4]), s)
        assert d == pytest.approx(3.0) and f is Clamp.AT_A

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(1)
        p, a, b = rng.normal(size=(3, 200, 3)) * 50
        dist, _ = point_segment_distance_batch(p, a, b)
        ref = [point_segment_distance(p[i], Segment3(a[i], b[i]))[0] for i in range(200)]
        np.testing.assert_allclose(dist, ref, rtol=0, atol=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(point, point, point)
    def test_properties(self, p, a, b):
        d, closest, _ = point_segment_distance(p, Segment3(a, b))
        rev, _, _ = point_segment_distance(p, Segment3(b, a))
        assert d >= 0
        assert d == pytest.approx(rev, abs=1e-9)
        assert d <= min(np.linalg.norm(p - a), np.linalg.norm(p - b)) + 1e-9
        assert d == pytest.approx(np.linalg.norm(p - closest), abs=1e-9)
        # closest point lies on the segment
        assert np.linalg.norm(closest - a) + np.linalg.norm(closest - b) == pytest.approx(
            np.linalg.norm(b - a), abs=1e-6
        )


class TestCylinder:
    c = Cylinder(np.array([0.0, 0, 0]), 5.0, 100.0)

    @pytest.mark.parametrize(
        "a, b, hit",
        [
            ((-10, 0, 50), (10, 0, 50), True),
            ((-10, 0, 150), (10, 0, 150), False),
            ((-10, 6, 50), (10, 6, 50), False),
            ((0, 0, 150), (0, 0, 50), True),
            ((1, 1, 20), (2, 1, 30), True),  # fully inside
            ((0, 0, 100), (0, 0, 140), True),  # touches the top cap
            ((5, -10, 50), (5, 10, 50), True),  # tangent to the side
            ((-10, 0, -1), (10, 0, -1), False),  # under the base
        ],
    )
    def test_examples(self, a, b, hit):
        assert segment_cylinder_intersects(Segment3(np.array(a, float), np.array(b, float)), self.c) is hit

    def test_top_cap_entry_sampling(self):
        a, b = np.array([0.0, 0, 150]), np.array([0.0, 0, 50])
        pts = a + np.linspace(0, 1, 10**5)[:, None] * (b - a)
        assert (depth(pts, self.c) >= 0).any()

    @settings(max_examples=200, deadline=None)
    @given(point, point)
    def test_endpoint_inside_implies_hit(self, a, b):
        if self.c.contains(a) or self.c.contains(b):
            assert segment_cylinder_intersects(Segment3(a, b), self.c)

    @settings(max_examples=100, deadline=None)
    @given(point, point)
    def test_symmetric_and_batch(self, a, b):
        pts = a + np.linspace(0, 1, 10**4)[:, None] * (b - a)
        assume(abs(depth(pts, self.c).max()) > 1e-6)
        fwd = segment_cylinder_intersects(Segment3(a, b), self.c)
        assert fwd == segment_cylinder_intersects(Segment3(b, a), self.c)
        assert fwd == bool(segment_cylinder_intersects_batch(a, b, self.c.base_center, 5.0, 100.0))


class TestFrames:
    def test_straight(self):
        f = frame_compose(Frame.identity(), 0, 0, 10)
        np.testing.assert_allclose(f.origin, [0, 0, 10])
        np.testing.assert_allclose(f.rotation, np.eye(3))

    @pytest.mark.parametrize("tx, ty", [(math.pi / 4, 0), (0, math.pi / 4), (0.3, -0.7)])
    def test_against_homogeneous(self, tx, ty):
        f = frame_compose(Frame.identity(), tx, ty, 10)
        h = homogeneous(tx, ty, 10)
        np.testing.assert_allclose(f.origin, h[:3, 3], atol=1e-12)
        np.testing.assert_allclose(f.rotation, h[:3, :3], atol=1e-12)

    def test_single_axis_values(self):
        s = 10 * math.sin(math.pi / 4)
        np.testing.assert_allclose(frame_compose(Frame.identity(), math.pi / 4, 0, 10).origin, [0, -s, s], atol=1e-12)
        np.testing.assert_allclose(frame_compose(Frame.identity(), 0, math.pi / 4, 10).origin, [s, 0, s], atol=1e-12)

    def test_negative_length_rejected(self):
        with pytest.raises(ValueError):
            frame_compose(Frame.identity(), 0, 0, -1)

    def test_non_orthonormal_rejected(self):
        with pytest.raises(ValueError):
            Frame(np.zeros(3), np.diag([1.0, 1.0, 2.0]))

    @settings(max_examples=200, deadline=None)
    @given(angle, angle, st.floats(0, 100), angle, angle)
    def test_compose_invariants(self, tx, ty, length, px, py):
        parent = frame_compose(Frame.identity(), px, py, 5.0)
        child = frame_compose(parent, tx, ty, length)
        r = child.rotation
        np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)
        assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(child.origin - parent.origin) == pytest.approx(length, abs=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(angle, angle)
    def test_steer_rotation_closed_form(self, tx, ty):
        np.testing.assert_allclose(steer_rotation(tx, ty), homogeneous(tx, ty, 0)[:3, :3], atol=1e-14)


class TestAngle:
    def test_examples(self):
        assert angle_between([0, 0, 1], [0, 0, 1]) == 0.0
        assert angle_between([1, 0, 0], [0, 1, 0]) == pytest.approx(math.pi / 2)
        assert angle_between([1, 0, 0], [-1, 1e-13, 0]) == pytest.approx(math.pi)

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            angle_between([0, 0, 0], [1, 0, 0])

    @settings(max_examples=200, deadline=None)
    @given(point, point)
    def test_range_and_symmetry(self, u, v):
        if np.linalg.norm(u) < 1e-6 or np.linalg.norm(v) < 1e-6:
            return
        a = angle_between(u, v)
        assert 0.0 <= a <= math.pi
        assert a == pytest.approx(angle_between(v, u), abs=1e-12)
