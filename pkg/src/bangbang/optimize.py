"""Shortcut optimisation of bang-bang trajectories and the path lift.

The optimiser repeatedly picks an interval ``[t1, t2]`` of the current
trajectory and replaces it with the free-space time-optimal motion between
its end states whenever that motion is faster and collision-free.  The lift
turns a configuration-space polyline into a trajectory that stops at every
vertex, which gives the optimiser a feasible starting point.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .planners import (
    FAILURE,
    SOLUTION,
    InvalidQuery,
    PlanResult,
    PlanStats,
    make_rng,
    rrt_connect_geometric,
)
from .steering import PhaseState, as_bounds, steer_nd
from .trajectory import Trajectory
from .world import Scene, trajectory_free

RANDOM = "random"
HALTON = "halton"


@dataclass(frozen=True)
class ShortcutConfig:
    max_iterations: int = 10_000
    stall_window: int = 200
    stall_epsilon: float = 0.1
    rng_seed: int = 0
    # None uses the scene's resolution
    collision_resolution: float | None = None
    interval_rule: str = RANDOM

    def __post_init__(self):
        if self.max_iterations <= 0 or self.stall_window <= 0:
            raise ValueError("iteration counts must be positive")
        if self.stall_epsilon <= 0:
            raise ValueError("stall_epsilon must be positive")
        if self.collision_resolution is not None and self.collision_resolution <= 0:
            raise ValueError("collision_resolution must be positive")
        if self.interval_rule not in (RANDOM, HALTON):
            raise ValueError(f"unknown interval rule {self.interval_rule!r}")


@dataclass(frozen=True)
class TraceRecord:
    t1: float
    t2: float
    accepted: bool
    new_duration: float


@dataclass
class OptimizeTrace:
    initial_duration: float = 0.0
    records: list = field(default_factory=list)
    collision_checks: int = 0
    wall_time: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def accepted(self) -> int:
        return sum(r.accepted for r in self.records)

    def durations(self) -> np.ndarray:
        """Duration after each attempt, preceded by the initial duration."""
        return np.array([self.initial_duration] + [r.new_duration for r in self.records])


# ---------------------------------------------------------------------------
# interval selection


def _order_interval(u1: float, u2: float, heads: bool, t_F: float) -> tuple[float, float]:
    if u1 < u2:
        return u1, u2
    # unordered draw: keep one end of the trajectory fixed
    return (0.0, u2) if heads else (u1, t_F)


def pick_interval(rng, t_F: float) -> tuple[float, float]:
    """Random interval in ``[0, t_F]``; ties and reversed draws fall back to a coin flip."""
    if t_F <= 0:
        raise ValueError("t_F must be positive")
    u1, u2 = rng.uniform(0.0, t_F, size=2)
    heads = rng.random() < 0.5
    return _order_interval(float(u1), float(u2), heads, t_F)


class HaltonIntervals:
    """Deterministic interval source: unscrambled 3D Halton points.

    The first two coordinates are the times (as fractions of ``t_F``), the
    third plays the coin.
    """

    def __init__(self, skip: int = 1):
        self._engine = qmc.Halton(d=3, scramble=False)
        if skip:
            self._engine.fast_forward(skip)

    def __call__(self, t_F: float) -> tuple[float, float]:
        u1, u2, c = self._engine.random(1)[0]
        return _order_interval(float(u1 * t_F), float(u2 * t_F), bool(c < 0.5), t_F)


# ---------------------------------------------------------------------------
# shortcutting


def shortcut_step(scene: Scene, traj: Trajectory, t1: float, t2: float, bounds=None,
                  resolution: float | None = None, counter: list | None = None) -> Trajectory | None:
    """Try to replace ``traj`` on ``[t1, t2]`` by the direct bang-bang motion.

    Returns the shorter trajectory, or ``None`` when the direct motion is not
    faster or is not collision-free.  ``counter[0]`` accumulates collision
    checks if given.
    """
    if not (0.0 <= t1 < t2 <= traj.duration):
        raise ValueError(f"need 0 <= t1 < t2 <= {traj.duration!r}, got [{t1!r}, {t2!r}]")
    bounds = scene.accel if bounds is None else bounds
    res = scene.resolution if resolution is None else resolution
    a = traj.evaluate(t1)
    b = traj.evaluate(t2)
    plan = steer_nd(a, b, bounds)
    span = t2 - t1
    # demand a gain above rounding noise so accepted steps strictly shorten
    if not plan.arrival_time < span - 1e-12 * max(1.0, traj.duration):
        return None
    mid = Trajectory.from_plan(a, plan)
    report = trajectory_free(scene, mid, res)
    if counter is not None:
        counter[0] += report.checks_performed
    if not report.free:
        return None
    return traj.splice(t1, t2, mid)


def optimize_trajectory(scene: Scene, traj: Trajectory, config: ShortcutConfig | None = None,
                        bounds=None) -> tuple[Trajectory, OptimizeTrace]:
    """Shortcut ``traj`` until ``max_iterations`` or a stall.

    A stall means the last ``stall_window`` attempts together shaved off no
    more than ``stall_epsilon``.
    """
    config = ShortcutConfig() if config is None else config
    res = scene.resolution if config.collision_resolution is None else config.collision_resolution
    t0 = time.perf_counter()
    counter = [0]
    check = trajectory_free(scene, traj, res)
    counter[0] += check.checks_performed
    if not check.free:
        raise ValueError(f"input trajectory is invalid at t={check.first_hit_time!r}")
    trace = OptimizeTrace(initial_duration=traj.duration)
    if config.interval_rule == HALTON:
        draw = HaltonIntervals()
    else:
        rng = make_rng(config.rng_seed)

        def draw(t_F):
            return pick_interval(rng, t_F)

    history = [traj.duration]
    for _ in range(config.max_iterations):
        if traj.duration <= 0.0:
            break
        t1, t2 = draw(traj.duration)
        new = None
        if t2 > t1:
            new = shortcut_step(scene, traj, t1, t2, bounds, res, counter)
        if new is not None:
            # the splice is re-checked whole: its sample grid differs from the piece's
            whole = trajectory_free(scene, new, res)
            counter[0] += whole.checks_performed
            if whole.free:
                traj = new
            else:
                new = None
        trace.records.append(TraceRecord(t1, t2, new is not None, traj.duration))
        history.append(traj.duration)
        w = config.stall_window
        if len(history) > w and history[-1 - w] - history[-1] <= config.stall_epsilon:
            break
    trace.collision_checks = counter[0]
    trace.wall_time = time.perf_counter() - t0
    return traj, trace


# ---------------------------------------------------------------------------
# path lift


def bang_bang_transform(path, bounds) -> Trajectory:
    """Rest-to-rest trajectory along a polyline, time-optimal on every edge.

    Each axis is scaled by its tighter acceleration bound so that all axes
    share one accelerate-then-brake profile; the motion therefore stays on
    the edge segment.  Zero-length edges are skipped.
    """
    P = np.atleast_2d(np.asarray(path, dtype=float))
    n = P.shape[1]
    a_min, a_max = as_bounds(bounds, n)
    m = np.minimum(a_max, -a_min)
    x0 = PhaseState(P[0], np.zeros(n))
    controls = [[] for _ in range(n)]
    for q, q_next in zip(P[:-1], P[1:]):
        v = (q_next - q) / m
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            continue
        v_hat = v / norm
        s = float(np.abs(v_hat).max())
        a = m * v_hat / s
        t = float(np.sqrt(s * norm))
        for i in range(n):
            controls[i].append((float(a[i]), t))
            controls[i].append((float(-a[i]), t))
    if not controls[0]:
        return Trajectory.stationary(x0)
    return Trajectory(x0, controls)


@dataclass(frozen=True)
class GeometricConfig:
    step: float
    seed: int = 0
    max_iterations: int = 10_000
    resolution: float | None = None


def lift_and_optimize(scene: Scene, q_I, q_G, planner_config: GeometricConfig,
                      shortcut_config: ShortcutConfig | None = None) -> PlanResult:
    """Geometric RRT-Connect path, lifted to a rest-to-rest trajectory and shortcut.

    ``stats.extra`` holds ``raw_duration`` (the lifted path), ``path_vertices``,
    ``optimize_iterations`` and the optimiser's ``trace``.
    """
    q_I, q_G = _rest_config(q_I), _rest_config(q_G)
    t0 = time.perf_counter()
    geo = rrt_connect_geometric(
        scene, q_I, q_G, planner_config.step, planner_config.seed,
        planner_config.max_iterations, planner_config.resolution,
    )
    stats = PlanStats(
        iterations=geo.stats.iterations,
        nodes=geo.stats.nodes,
        collision_checks=geo.stats.collision_checks,
    )
    if geo.path is None:
        stats.wall_time = time.perf_counter() - t0
        return PlanResult(FAILURE, None, stats)
    raw = bang_bang_transform(geo.path, scene.accel)
    stats.extra["raw_duration"] = raw.duration
    stats.extra["path_vertices"] = len(geo.path)
    stats.extra["geometric_time"] = geo.stats.wall_time
    res = scene.resolution if shortcut_config is None or shortcut_config.collision_resolution is None \
        else shortcut_config.collision_resolution
    check = trajectory_free(scene, raw, res)
    if not check.free:
        # e.g. a long edge whose rest-to-rest peak speed exceeds the velocity bounds
        stats.collision_checks += check.checks_performed
        stats.extra["lift_invalid_at"] = check.first_hit_time
        stats.wall_time = time.perf_counter() - t0
        return PlanResult(FAILURE, None, stats)
    traj, trace = optimize_trajectory(scene, raw, shortcut_config)
    stats.collision_checks += trace.collision_checks
    stats.extra["optimize_iterations"] = trace.iterations
    stats.extra["trace"] = trace
    stats.wall_time = time.perf_counter() - t0
    return PlanResult(SOLUTION, traj, stats)


def _rest_config(x) -> np.ndarray:
    if isinstance(x, PhaseState):
        if np.any(x.q_dot != 0.0):
            raise InvalidQuery("the lift needs rest-to-rest queries")
        return x.q.copy()
    return np.asarray(x, dtype=float)
