"""Environment suite: curriculum rooms, unseen test rooms, difficulty metrics,
random episode spawning, and the JSON environment file format.

File schema (all lengths in meters):

    {
      "name": str,
      "geometry": {
        "bounds": [xmin, ymin, xmax, ymax],
        "obstacles": [[[x, y], ...], ...]        # convex CCW polygons
      },
      "spawn_region": [[xmin, ymin, xmax, ymax], ...],
      "goal_region":  [[xmin, ymin, xmax, ymax], ...]
    }
"""

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import geometry
from .errors import ContractError, EnvironmentFormatError, UnsatisfiableRegionError
from .sim import RobotState, WorldGeometry

CURRICULUM = ("baseEnv", "intEnv", "finalEnv")
TEST_ENVS = ("envTest1", "envTest2", "envTest3", "envTest4", "envTest5")

MAX_REJECTIONS = 10_000


@dataclass(frozen=True)
class DifficultyMetrics:
    occupied_area: float
    min_obstacle_gap: float


class EnvironmentSpec:
    """Named room plus rectangular spawn/goal regions."""

    def __init__(self, name, world: WorldGeometry, spawn_region, goal_region):
        self.name = str(name)
        self.world = world
        self.spawn_region = tuple(tuple(float(v) for v in r) for r in spawn_region)
        self.goal_region = tuple(tuple(float(v) for v in r) for r in goal_region)
        for label, region in (("spawn_region", self.spawn_region), ("goal_region", self.goal_region)):
            if not region:
                raise ContractError(f"{self.name}: {label} is empty")
            for r in region:
                if not (r[2] > r[0] and r[3] > r[1]):
                    raise ContractError(f"{self.name}: degenerate {label} rect {r}")
        self._difficulty = None

    @property
    def difficulty(self) -> DifficultyMetrics:
        if self._difficulty is None:
            self._difficulty = compute_difficulty(self)
        return self._difficulty

    def validate(self, robot_radius: float = 0.4):
        """Check spawn/goal regions keep robot_radius clearance from obstacles."""
        for label, region in (("spawn_region", self.spawn_region), ("goal_region", self.goal_region)):
            for r in region:
                rect_poly = np.array(
                    [[r[0], r[1]], [r[2], r[1]], [r[2], r[3]], [r[0], r[3]]], dtype=float
                )
                for k, obs in enumerate(self.world.obstacles):
                    too_close = geometry.polygon_distance(rect_poly, obs) < robot_radius
                    # boundary distance misses full containment either way
                    contained = (
                        r[0] <= obs[0, 0] <= r[2] and r[1] <= obs[0, 1] <= r[3]
                    ) or geometry.point_in_polygon(r[0], r[1], obs)
                    if too_close or contained:
                        raise ContractError(
                            f"{self.name}: {label} rect {r} within {robot_radius} m of obstacle {k}"
                        )
        return self

    def __eq__(self, other):
        return (
            isinstance(other, EnvironmentSpec)
            and self.name == other.name
            and self.world == other.world
            and self.spawn_region == other.spawn_region
            and self.goal_region == other.goal_region
        )


def compute_difficulty(spec: EnvironmentSpec) -> DifficultyMetrics:
    """Occupied area (shoelace sum) and minimum pairwise obstacle distance.

    With fewer than two obstacles the gap is reported as the room diagonal
    (sentinel: "no pair to measure"). Boundary walls never count as obstacles.
    """
    obstacles = spec.world.obstacles
    occupied = sum(geometry.polygon_area(o) for o in obstacles)
    if len(obstacles) < 2:
        gap = spec.world.diagonal
    else:
        gap = math.inf
        for i in range(len(obstacles)):
            for j in range(i + 1, len(obstacles)):
                gap = min(gap, geometry.polygon_distance(obstacles[i], obstacles[j]))
    return DifficultyMetrics(occupied_area=occupied, min_obstacle_gap=gap)


def _sample_region(region, areas, rng, world, radius):
    for _ in range(MAX_REJECTIONS):
        r = region[rng.choice(len(region), p=areas)]
        x = rng.uniform(r[0], r[2])
        y = rng.uniform(r[1], r[3])
        if world.point_clear(x, y, radius):
            return x, y
    raise UnsatisfiableRegionError(
        f"{MAX_REJECTIONS} consecutive rejections sampling region {region}"
    )


def sample_episode(spec: EnvironmentSpec, rng, robot_radius: float = 0.4):
    """Draw (RobotState, goal) uniformly from the spawn/goal regions.

    `rng` is a seed or numpy Generator; equal seeds reproduce exactly.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)

    def weights(region):
        a = np.array([(r[2] - r[0]) * (r[3] - r[1]) for r in region])
        return a / a.sum()

    world = spec.world
    sx, sy = _sample_region(spec.spawn_region, weights(spec.spawn_region), rng, world, robot_radius)
    for _ in range(MAX_REJECTIONS):
        gx, gy = _sample_region(spec.goal_region, weights(spec.goal_region), rng, world, robot_radius)
        if (gx, gy) != (sx, sy):
            break
    else:
        raise UnsatisfiableRegionError("goal kept landing on the start position")
    heading = rng.uniform(-math.pi, math.pi)
    return RobotState(sx, sy, heading, robot_radius), (gx, gy)


# ------------------------------------------------------------------ file IO

def _require(mapping, field, where):
    if field not in mapping:
        raise EnvironmentFormatError(f"{where}: missing field '{field}'")
    return mapping[field]


def spec_from_dict(raw: dict, where: str = "<dict>") -> EnvironmentSpec:
    if not isinstance(raw, dict):
        raise EnvironmentFormatError(f"{where}: expected a JSON object at top level")
    name = _require(raw, "name", where)
    geom = _require(raw, "geometry", where)
    bounds = _require(geom, "bounds", f"{where}: geometry")
    obstacles = _require(geom, "obstacles", f"{where}: geometry")
    spawn = _require(raw, "spawn_region", where)
    goal = _require(raw, "goal_region", where)
    try:
        world = WorldGeometry(bounds, obstacles)
    except (ContractError, ValueError, TypeError) as exc:
        raise EnvironmentFormatError(f"{where}: bad geometry: {exc}") from exc
    try:
        return EnvironmentSpec(name, world, spawn, goal)
    except (ContractError, ValueError, TypeError) as exc:
        raise EnvironmentFormatError(f"{where}: bad region: {exc}") from exc


def spec_to_dict(spec: EnvironmentSpec) -> dict:
    return {
        "name": spec.name,
        "geometry": {
            "bounds": list(spec.world.bounds),
            "obstacles": [o.tolist() for o in spec.world.obstacles],
        },
        "spawn_region": [list(r) for r in spec.spawn_region],
        "goal_region": [list(r) for r in spec.goal_region],
    }


def load_environment(path) -> EnvironmentSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise EnvironmentFormatError(f"{path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise EnvironmentFormatError(f"{path}: {exc}") from exc
    return spec_from_dict(raw, where=str(path))


def save_environment(spec: EnvironmentSpec, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2)
        fh.write("\n")


def builtin_names():
    return list(CURRICULUM) + list(TEST_ENVS)


def load_builtin(name: str) -> EnvironmentSpec:
    ref = resources.files("curricnav").joinpath(f"data/{name}.json")
    if not ref.is_file():
        raise EnvironmentFormatError(f"no bundled environment named '{name}'")
    with resources.as_file(ref) as path:
        return load_environment(path)


def resolve_environment(name_or_path, env_dir=None) -> EnvironmentSpec:
    """Bundled name, a path, or a name resolved inside env_dir."""
    s = str(name_or_path)
    if s in builtin_names():
        return load_builtin(s)
    if env_dir is not None:
        import os

        cand = os.path.join(env_dir, s if s.endswith(".json") else s + ".json")
        if os.path.exists(cand):
            return load_environment(cand)
    return load_environment(s)
