import json
import math

import numpy as np
import pytest

from curricnav import envs, sim
from curricnav.errors import (
    ContractError,
    EnvironmentFormatError,
    UnsatisfiableRegionError,
)


def make_spec(obstacles, spawn=((2, 2, 48, 16),), goal=((2, 34, 48, 48),), name="t"):
    world = sim.WorldGeometry((0.0, 0.0, 50.0, 50.0), obstacles)
    return envs.EnvironmentSpec(name, world, spawn, goal)


def square(x, y, side=1.0):
    return [(x, y), (x + side, y), (x + side, y + side), (x, y + side)]


# ------------------------------------------------------------ difficulty

def test_difficulty_two_squares():
    spec = make_spec([square(10, 5), square(14, 5)])
    d = envs.compute_difficulty(spec)
    assert d.occupied_area == pytest.approx(2.0)
    assert d.min_obstacle_gap == pytest.approx(3.0)


def test_difficulty_single_obstacle_sentinel():
    spec = make_spec([square(10, 5)])
    d = envs.compute_difficulty(spec)
    assert d.min_obstacle_gap == pytest.approx(math.hypot(50, 50))


def _point_seg(px, py, ax, ay, bx, by):
    vx, vy = bx - ax, by - ay
    t = max(0.0, min(1.0, ((px - ax) * vx + (py - ay) * vy) / (vx * vx + vy * vy)))
    return math.hypot(px - (ax + t * vx), py - (ay + t * vy))


def test_difficulty_finalenv_matches_sampling_oracle():
    """Monte-Carlo area + vertex/edge gap enumeration, both test-local."""
    import shapely

    spec = envs.load_builtin("finalEnv")
    polys = [shapely.Polygon(o.tolist()) for o in spec.world.obstacles]
    union = shapely.unary_union(polys)
    rng = np.random.default_rng(7)
    n = 1_000_000
    xs = rng.uniform(0, 50, n)
    ys = rng.uniform(0, 50, n)
    inside = shapely.contains_xy(union, xs, ys)
    mc_area = inside.mean() * 2500.0

    gap = math.inf
    obs = [o.tolist() for o in spec.world.obstacles]
    for i in range(len(obs)):
        for j in range(len(obs)):
            if i == j:
                continue
            a = obs[i]
            b = obs[j]
            for px, py in a:
                for k in range(len(b)):
                    x1, y1 = b[k]
                    x2, y2 = b[(k + 1) % len(b)]
                    gap = min(gap, _point_seg(px, py, x1, y1, x2, y2))

    d = spec.difficulty
    assert d.occupied_area == pytest.approx(mc_area, rel=0.01)
    assert d.min_obstacle_gap == pytest.approx(gap, rel=0.01)


def test_curriculum_difficulty_ordering():
    metrics = [envs.load_builtin(n).difficulty for n in envs.CURRICULUM]
    areas = [m.occupied_area for m in metrics]
    gaps = [m.min_obstacle_gap for m in metrics]
    assert areas[0] < areas[1] < areas[2]
    assert gaps[0] >= gaps[1] >= gaps[2]


def test_test_envs_ordered_by_area():
    areas = [envs.load_builtin(n).difficulty.occupied_area for n in envs.TEST_ENVS]
    assert areas == sorted(areas)


def test_bundled_specs_valid():
    for name in envs.builtin_names():
        spec = envs.load_builtin(name)
        spec.validate(robot_radius=0.4)


# ------------------------------------------------------------ sampling

def test_sample_episode_reproducible():
    spec = envs.load_builtin("baseEnv")
    r1, g1 = envs.sample_episode(spec, 123)
    r2, g2 = envs.sample_episode(spec, 123)
    assert r1 == r2 and g1 == g2
    r3, g3 = envs.sample_episode(spec, 124)
    assert (r1, g1) != (r3, g3)


def test_sample_episode_clear_and_distinct():
    spec = envs.load_builtin("finalEnv")
    rng = np.random.default_rng(5)
    for _ in range(200):
        robot, goal = envs.sample_episode(spec, rng)
        assert spec.world.point_clear(robot.x, robot.y, robot.radius)
        assert spec.world.point_clear(goal[0], goal[1], robot.radius)
        assert (robot.x, robot.y) != goal


def test_sample_episode_unsatisfiable():
    # region entirely inside the boundary margin for a 0.4 m robot
    world = sim.WorldGeometry((0.0, 0.0, 50.0, 50.0))
    spec = envs.EnvironmentSpec("bad", world, [(0.05, 0.05, 0.3, 0.3)], [(2, 2, 4, 4)])
    with pytest.raises(UnsatisfiableRegionError):
        envs.sample_episode(spec, 0)


def test_sample_uniformity_chi_square():
    """4x4 grid occupancy over the spawn rect is not rejected at alpha=0.01."""
    from scipy import stats

    world = sim.WorldGeometry((0.0, 0.0, 50.0, 50.0))
    spec = envs.EnvironmentSpec("uniform", world, [(10, 10, 42, 42)], [(2, 2, 48, 48)])
    rng = np.random.default_rng(99)
    n = 10_000
    counts = np.zeros((4, 4))
    for _ in range(n):
        robot, _ = envs.sample_episode(spec, rng)
        ix = min(3, int((robot.x - 10) / 8))
        iy = min(3, int((robot.y - 10) / 8))
        counts[ix, iy] += 1
    expected = n / 16.0
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 < stats.chi2.ppf(0.99, df=15)


# ------------------------------------------------------------ file IO

def test_round_trip_identity(tmp_path):
    spec = envs.load_builtin("baseEnv")
    path = tmp_path / "copy.json"
    envs.save_environment(spec, path)
    again = envs.load_environment(path)
    assert again == spec


def test_round_trip_all_bundled(tmp_path):
    for name in envs.builtin_names():
        spec = envs.load_builtin(name)
        p = tmp_path / f"{name}.json"
        envs.save_environment(spec, p)
        assert envs.load_environment(p) == spec


def test_missing_geometry_field(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text(json.dumps({"name": "x", "spawn_region": [], "goal_region": []}))
    with pytest.raises(EnvironmentFormatError, match="geometry"):
        envs.load_environment(path)


def test_malformed_json_names_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"name": "x",\n  "geometry": }')
    with pytest.raises(EnvironmentFormatError, match="line 2"):
        envs.load_environment(path)


def test_minimal_empty_room(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text(
        json.dumps(
            {
                "name": "empty",
                "geometry": {"bounds": [0, 0, 50, 50], "obstacles": []},
                "spawn_region": [[2, 2, 48, 48]],
                "goal_region": [[2, 2, 48, 48]],
            }
        )
    )
    spec = envs.load_environment(path)
    assert len(spec.world.obstacles) == 0


def test_validate_rejects_overlapping_region():
    world = sim.WorldGeometry((0.0, 0.0, 50.0, 50.0), [square(10, 10, 5)])
    spec = envs.EnvironmentSpec("bad", world, [(8, 8, 20, 20)], [(30, 30, 40, 40)])
    with pytest.raises(ContractError, match="spawn_region"):
        spec.validate()


def test_resolve_environment(tmp_path):
    assert envs.resolve_environment("baseEnv").name == "baseEnv"
    spec = envs.load_builtin("intEnv")
    p = tmp_path / "custom.json"
    envs.save_environment(spec, p)
    assert envs.resolve_environment(str(p)).name == "intEnv"
    assert envs.resolve_environment("custom", env_dir=str(tmp_path)).name == "intEnv"
