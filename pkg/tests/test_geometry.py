import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import LineString

from curricnav import geometry, kernels
from conftest import random_world

coord = st.floats(
    min_value=-20.0, max_value=20.0, allow_nan=False, allow_infinity=False, allow_subnormal=False
)


@given(coord, coord, coord, coord, coord, coord, coord, coord)
@settings(max_examples=200, deadline=None)
def test_segment_distance_matches_shapely(ax, ay, bx, by, cx, cy, dx, dy):
    # shapely's oracle is undefined for zero-length linestrings
    if math.hypot(bx - ax, by - ay) < 1e-9 or math.hypot(dx - cx, dy - cy) < 1e-9:
        return
    got = geometry.segment_segment_distance(ax, ay, bx, by, cx, cy, dx, dy)
    want = LineString([(ax, ay), (bx, by)]).distance(LineString([(cx, cy), (dx, dy)]))
    assert got == pytest.approx(want, abs=1e-9)


def test_polygon_area_shoelace():
    square = np.array([(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)])
    assert geometry.polygon_area(square) == 4.0
    assert geometry.signed_area(square) == 4.0
    assert geometry.signed_area(square[::-1]) == -4.0
    tri = np.array([(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)])
    assert geometry.polygon_area(tri) == 6.0


def test_convexity_and_simplicity_checks():
    square = np.array([(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)])
    assert geometry.is_convex_ccw(square)
    assert not geometry.is_convex_ccw(square[::-1])  # clockwise
    bowtie = np.array([(0.0, 0.0), (2.0, 2.0), (2.0, 0.0), (0.0, 2.0)])
    assert not geometry.is_simple(bowtie)
    concave = np.array([(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (2.0, 1.0), (0.0, 4.0)])
    assert geometry.is_simple(concave)
    assert not geometry.is_convex_ccw(concave)


def test_point_in_polygon():
    square = np.array([(1.0, 1.0), (3.0, 1.0), (3.0, 3.0), (1.0, 3.0)])
    assert geometry.point_in_polygon(2.0, 2.0, square)
    assert not geometry.point_in_polygon(0.5, 2.0, square)
    assert not geometry.point_in_polygon(3.5, 2.0, square)


def test_polygon_distance():
    a = np.array([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    b = a + np.array([4.0, 0.0])
    assert geometry.polygon_distance(a, b) == pytest.approx(3.0)
    assert geometry.polygon_distance(a, a + np.array([0.5, 0.5])) == 0.0


@pytest.mark.skipif(not kernels.COMPILED, reason="compiled kernels not built")
def test_kernel_implementations_agree(rng):
    """Compiled and fallback kernels agree on scans and clearance."""
    impls = dict(kernels.implementations())
    comp, fall = impls["compiled"], impls["fallback"]
    for trial in range(30):
        world = random_world(rng)
        ox, oy = rng.uniform(5, 45, size=2)
        heading = rng.uniform(-math.pi, math.pi)
        a = comp.scan_hits(world.all_edges, ox, oy, heading, 51, 10.0)
        b = fall.scan_hits(world.all_edges, ox, oy, heading, 51, 10.0)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-9)
        x1, y1 = rng.uniform(5, 45, size=2)
        ca = comp.min_clearance(world.obstacle_edges, ox, oy, x1, y1)
        cb = fall.min_clearance(world.obstacle_edges, ox, oy, x1, y1)
        assert ca == pytest.approx(cb, abs=1e-9)
        ra = comp.ray_hit(world.all_edges, ox, oy, heading, 25.0)
        rb = fall.ray_hit(world.all_edges, ox, oy, heading, 25.0)
        assert ra == pytest.approx(rb, abs=1e-9)


def test_min_clearance_vs_shapely(rng):
    for _ in range(50):
        world = random_world(rng, n_boxes=3)
        a = rng.uniform(2, 48, size=2)
        b = rng.uniform(2, 48, size=2)
        got = kernels.min_clearance(world.obstacle_edges, a[0], a[1], b[0], b[1])
        seg = LineString([tuple(a), tuple(b)])
        want = min(
            seg.distance(LineString([(x1, y1), (x2, y2)]))
            for x1, y1, x2, y2 in world.obstacle_edges
        )
        assert got == pytest.approx(want, abs=1e-9)
