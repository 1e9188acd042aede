"""Deterministic 2D navigation simulator.

An omnidirectional robot (collision disc) moves in a rectangular room with
convex polygonal obstacles, senses through a 51-ray 360-degree lidar plus the
goal in polar coordinates, and receives a dense progress reward with sparse
crash/reach terminals.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import geometry, kernels
from .errors import ContractError

N_SCANS = 51
OBS_DIM = N_SCANS + 2


def wrap_angle(a: float) -> float:
    """Normalize to [-pi, pi)."""
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a < 0.0:
        a += 2.0 * math.pi
    return a - math.pi


class Terminal(Enum):
    NONE = "none"
    CRASHED = "crashed"
    REACHED = "reached"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class ActionSpec:
    """One discrete action: a translation at a relative angle, or a rotation.

    kind: "translate" (angle = offset from heading, radians; negative is to
    the right of heading) or "rotate" (angle = +1 left / -1 right multiplier
    for SimParams.turn_angle).
    """

    kind: str
    angle: float

    def describe(self) -> str:
        if self.kind == "translate":
            return f"move{round(math.degrees(self.angle)):+d}"
        return "rot-left" if self.angle > 0 else "rot-right"


DEFAULT_ACTIONS = (
    ActionSpec("translate", -math.pi / 2),
    ActionSpec("translate", -math.pi / 4),
    ActionSpec("translate", 0.0),
    ActionSpec("translate", math.pi / 4),
    ActionSpec("translate", math.pi / 2),
    ActionSpec("rotate", 1.0),
    ActionSpec("rotate", -1.0),
)


@dataclass(frozen=True)
class SimParams:
    step_length: float = 0.5
    turn_angle: float = math.radians(30.0)
    goal_radius: float = 1.0
    robot_radius: float = 0.4
    max_range: float = 10.0
    max_steps: int = 500
    progress_gain: float = 10.0
    crash_reward: float = -100.0
    reach_reward: float = 300.0
    actions: tuple = DEFAULT_ACTIONS

    @property
    def n_actions(self) -> int:
        return len(self.actions)


class WorldGeometry:
    """Immutable room: axis-aligned bounds plus convex CCW obstacle polygons."""

    def __init__(self, bounds, obstacles=(), validate=True):
        self.bounds = tuple(float(v) for v in bounds)
        xmin, ymin, xmax, ymax = self.bounds
        if not (xmax > xmin and ymax > ymin):
            raise ContractError(f"degenerate bounds {self.bounds}")
        self.obstacles = tuple(
            np.ascontiguousarray(np.asarray(o, dtype=float)) for o in obstacles
        )
        if validate:
            self._validate()
        boundary = np.array(
            [
                [xmin, ymin, xmax, ymin],
                [xmax, ymin, xmax, ymax],
                [xmax, ymax, xmin, ymax],
                [xmin, ymax, xmin, ymin],
            ]
        )
        obstacle_edges = [geometry.polygon_edges(o) for o in self.obstacles]
        self.obstacle_edges = (
            np.ascontiguousarray(np.vstack(obstacle_edges))
            if obstacle_edges
            else np.empty((0, 4))
        )
        self.all_edges = np.ascontiguousarray(
            np.vstack([boundary, self.obstacle_edges])
        )
        self.diagonal = math.hypot(xmax - xmin, ymax - ymin)

    def _validate(self):
        xmin, ymin, xmax, ymax = self.bounds
        for k, obs in enumerate(self.obstacles):
            if obs.ndim != 2 or obs.shape[1] != 2 or len(obs) < 3:
                raise ContractError(f"obstacle {k}: need >=3 (x, y) vertices")
            if not (
                (obs[:, 0] > xmin).all()
                and (obs[:, 0] < xmax).all()
                and (obs[:, 1] > ymin).all()
                and (obs[:, 1] < ymax).all()
            ):
                raise ContractError(f"obstacle {k}: vertices must lie strictly inside bounds")
            if not geometry.is_simple(obs):
                raise ContractError(f"obstacle {k}: polygon is self-intersecting")
            if not geometry.is_convex_ccw(obs):
                raise ContractError(f"obstacle {k}: polygon must be convex with CCW winding")

    def contains(self, x: float, y: float) -> bool:
        xmin, ymin, xmax, ymax = self.bounds
        return xmin < x < xmax and ymin < y < ymax

    def point_clear(self, x: float, y: float, radius: float) -> bool:
        """Disc at (x, y) stays clear of boundary and obstacles."""
        xmin, ymin, xmax, ymax = self.bounds
        if not (
            xmin + radius <= x <= xmax - radius and ymin + radius <= y <= ymax - radius
        ):
            return False
        if self.obstacle_edges.shape[0] == 0:
            return True
        if kernels.min_clearance(self.obstacle_edges, x, y, x, y) < radius:
            return False
        return not any(geometry.point_in_polygon(x, y, o) for o in self.obstacles)

    def __eq__(self, other):
        return (
            isinstance(other, WorldGeometry)
            and self.bounds == other.bounds
            and len(self.obstacles) == len(other.obstacles)
            and all(np.array_equal(a, b) for a, b in zip(self.obstacles, other.obstacles))
        )


@dataclass(frozen=True)
class RobotState:
    x: float
    y: float
    heading: float
    radius: float = 0.4

    def __post_init__(self):
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    @property
    def position(self):
        return (self.x, self.y)


@dataclass(frozen=True)
class Observation:
    scans: np.ndarray
    goal_distance: float
    goal_bearing: float

    def vector(self) -> np.ndarray:
        out = np.empty(OBS_DIM)
        out[:N_SCANS] = self.scans
        out[N_SCANS] = self.goal_distance
        out[N_SCANS + 1] = self.goal_bearing
        return out


@dataclass(frozen=True)
class StepOutcome:
    observation: Observation
    reward: float
    terminal: Terminal


def raycast(world: WorldGeometry, origin, angle: float, max_range: float) -> float:
    """Distance to the nearest obstacle/boundary edge along the ray, capped."""
    ox, oy = float(origin[0]), float(origin[1])
    if not world.contains(ox, oy):
        raise ContractError(f"raycast origin {origin} outside bounds {world.bounds}")
    return float(kernels.ray_hit(world.all_edges, ox, oy, angle, max_range))


def observe_vector(
    world: WorldGeometry, robot: RobotState, goal, max_range: float, out=None
) -> np.ndarray:
    """53-vector observation; avoids the Observation wrapper in hot loops."""
    if out is None:
        out = np.empty(OBS_DIM)
    if not world.contains(robot.x, robot.y):
        raise ContractError("robot outside bounds")
    gx, gy = float(goal[0]), float(goal[1])
    if not world.contains(gx, gy):
        raise ContractError("goal outside bounds")
    hits = kernels.scan_hits(world.all_edges, robot.x, robot.y, robot.heading, N_SCANS, max_range)
    np.divide(hits, max_range, out=out[:N_SCANS])
    dist = math.hypot(gx - robot.x, gy - robot.y)
    out[N_SCANS] = dist / world.diagonal
    rel = wrap_angle(math.atan2(gy - robot.y, gx - robot.x) - robot.heading)
    out[N_SCANS + 1] = (rel + math.pi) / (2.0 * math.pi)
    return out


def observe(world: WorldGeometry, robot: RobotState, goal, max_range: float) -> Observation:
    vec = observe_vector(world, robot, goal, max_range)
    return Observation(
        scans=vec[:N_SCANS].copy(),
        goal_distance=float(vec[N_SCANS]),
        goal_bearing=float(vec[N_SCANS + 1]),
    )


def step(world: WorldGeometry, robot: RobotState, goal, action: int, params: SimParams):
    """One simulation step; returns (new robot state, outcome).

    Timeouts are the episode loop's concern (see Episode); this function only
    reports none/crashed/reached.
    """
    if not 0 <= action < params.n_actions:
        raise ContractError(f"action {action} out of range 0..{params.n_actions - 1}")
    spec = params.actions[action]
    gx, gy = float(goal[0]), float(goal[1])

    if spec.kind == "rotate":
        new_robot = RobotState(
            robot.x, robot.y, robot.heading + spec.angle * params.turn_angle, robot.radius
        )
        obs = observe(world, new_robot, goal, params.max_range)
        return new_robot, StepOutcome(obs, 0.0, Terminal.NONE)

    direction = robot.heading + spec.angle
    nx = robot.x + params.step_length * math.cos(direction)
    ny = robot.y + params.step_length * math.sin(direction)

    if _collides(world, robot.x, robot.y, nx, ny, robot.radius):
        obs = observe(world, robot, goal, params.max_range)
        return robot, StepOutcome(obs, params.crash_reward, Terminal.CRASHED)

    new_robot = RobotState(nx, ny, robot.heading, robot.radius)
    d_new = math.hypot(gx - nx, gy - ny)
    if d_new < params.goal_radius:
        obs = observe(world, new_robot, goal, params.max_range)
        return new_robot, StepOutcome(obs, params.reach_reward, Terminal.REACHED)

    d_old = math.hypot(gx - robot.x, gy - robot.y)
    reward = params.progress_gain * (d_old - d_new)
    obs = observe(world, new_robot, goal, params.max_range)
    return new_robot, StepOutcome(obs, reward, Terminal.NONE)


def _collides(world, x0, y0, x1, y1, radius):
    xmin, ymin, xmax, ymax = world.bounds
    if not (xmin + radius <= x1 <= xmax - radius and ymin + radius <= y1 <= ymax - radius):
        return True
    if world.obstacle_edges.shape[0] == 0:
        return False
    return kernels.min_clearance(world.obstacle_edges, x0, y0, x1, y1) < radius


class Episode:
    """Stateful episode loop: step counting, timeout, path accounting."""

    def __init__(self, world: WorldGeometry, params: SimParams, robot: RobotState, goal):
        self.world = world
        self.params = params
        self.robot = robot
        self.goal = (float(goal[0]), float(goal[1]))
        self.t = 0
        self.terminal = Terminal.NONE
        self.path_length = 0.0
        self.initial_distance = math.hypot(self.goal[0] - robot.x, self.goal[1] - robot.y)

    def observation(self) -> Observation:
        return observe(self.world, self.robot, self.goal, self.params.max_range)

    def observation_vector(self, out=None) -> np.ndarray:
        return observe_vector(self.world, self.robot, self.goal, self.params.max_range, out)

    def step(self, action: int) -> StepOutcome:
        if self.terminal is not Terminal.NONE:
            raise ContractError("step() on a finished episode")
        prev = self.robot
        self.robot, outcome = step(self.world, prev, self.goal, action, self.params)
        self.path_length += math.hypot(self.robot.x - prev.x, self.robot.y - prev.y)
        self.t += 1
        if outcome.terminal is Terminal.NONE and self.t >= self.params.max_steps:
            outcome = StepOutcome(outcome.observation, outcome.reward, Terminal.TIMEOUT)
        self.terminal = outcome.terminal
        return outcome
