import math

import numpy as np
import pytest

from curricnav import sim


def random_world(rng, n_boxes=4, side=50.0):
    """Random room with axis-aligned box obstacles (guaranteed valid)."""
    obstacles = []
    for _ in range(n_boxes):
        w, h = rng.uniform(1.0, 6.0, size=2)
        x = rng.uniform(1.0, side - 1.0 - w)
        y = rng.uniform(1.0, side - 1.0 - h)
        obstacles.append([(x, y), (x + w, y), (x + w, y + h), (x, y + h)])
    return sim.WorldGeometry((0.0, 0.0, side, side), obstacles)


def free_point(world, rng, radius=0.0):
    xmin, ymin, xmax, ymax = world.bounds
    for _ in range(10_000):
        x = rng.uniform(xmin + radius + 1e-6, xmax - radius - 1e-6)
        y = rng.uniform(ymin + radius + 1e-6, ymax - radius - 1e-6)
        if world.point_clear(x, y, max(radius, 1e-9)):
            return x, y
    raise AssertionError("could not place a free point")


def raycast_oracle(world, origin, angle, max_range):
    """Edge-by-edge enumeration through shapely (independent of the kernels)."""
    from shapely.geometry import LineString, Point

    ox, oy = origin
    probe = LineString(
        [
            (ox, oy),
            (ox + 2.0 * world.diagonal * math.cos(angle), oy + 2.0 * world.diagonal * math.sin(angle)),
        ]
    )
    start = Point(ox, oy)
    best = math.inf
    for x1, y1, x2, y2 in world.all_edges:
        inter = probe.intersection(LineString([(x1, y1), (x2, y2)]))
        if inter.is_empty:
            continue
        for pt in getattr(inter, "geoms", [inter]):
            if pt.geom_type == "Point":
                best = min(best, start.distance(pt))
            else:  # collinear overlap
                for c in pt.coords:
                    best = min(best, start.distance(Point(c)))
    return min(best, max_range)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def empty_room():
    return sim.WorldGeometry((0.0, 0.0, 50.0, 50.0))
