"""Scenes, robot models and collision checking.

Two robots are supported: a planar point (or disc) vehicle whose
configuration is its 2D position, and a fixed-base planar chain of equal
links whose configuration is the vector of joint angles.  Obstacles are
simple polygons in the workspace.  Checks are naive (every robot feature
against every obstacle edge) but vectorised over batches of configurations.

Velocity and position bounds are treated as state constraints: a
trajectory sample outside them counts as a collision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .trajectory import Trajectory

_CHUNK = 48


@dataclass(frozen=True)
class PlanarPoint:
    radius: float = 0.0

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be non-negative")


@dataclass(frozen=True)
class PlanarChain:
    links: int
    link_length: float
    base: tuple = (0.0, 0.0)
    joint_limit: float = math.pi
    self_collision: bool = False

    def __post_init__(self):
        if self.links < 1:
            raise ValueError("a chain needs at least one link")
        if self.link_length <= 0:
            raise ValueError("link length must be positive")
        object.__setattr__(self, "base", tuple(float(c) for c in self.base))


RobotModel = Union[PlanarPoint, PlanarChain]


@dataclass(frozen=True)
class CollisionReport:
    free: bool
    first_hit_time: float | None
    checks_performed: int


# ---------------------------------------------------------------------------
# planar geometry


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def points_in_polygon(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd ray casting for an ``(m, 2)`` batch of points."""
    x = points[:, 0:1]
    y = points[:, 1:2]
    x1, y1 = poly[:, 0][None, :], poly[:, 1][None, :]
    x2, y2 = np.roll(poly[:, 0], -1)[None, :], np.roll(poly[:, 1], -1)[None, :]
    straddle = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
    crossings = straddle & (x < xint)
    return (crossings.sum(axis=1) % 2) == 1


def _inside_any(scene: "Scene", points: np.ndarray) -> np.ndarray:
    """Whether each point lies inside any obstacle; all polygons in one pass."""
    ea, eb = scene._edges
    x = points[:, 0:1]
    y = points[:, 1:2]
    x1, y1 = ea[:, 0][None, :], ea[:, 1][None, :]
    x2, y2 = eb[:, 0][None, :], eb[:, 1][None, :]
    straddle = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
    crossings = (straddle & (x < xint)).astype(np.int32)
    per_poly = np.add.reduceat(crossings, scene._edge_starts, axis=1)
    return ((per_poly % 2) == 1).any(axis=1)


def point_segment_distance(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances from ``(m, 2)`` points to ``(e, 2)`` segments, shape ``(m, e)``."""
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    rel = points[:, None, :] - a[None, :, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(dd > 0, np.einsum("mej,ej->me", rel, d) / dd, 0.0)
    t = np.clip(t, 0.0, 1.0)
    closest = a[None] + t[..., None] * d[None]
    return np.linalg.norm(points[:, None, :] - closest, axis=-1)


def segments_intersect(p1, p2, q1, q2) -> np.ndarray:
    """Pairwise closed-segment intersection, ``(m, 2)`` x ``(e, 2)`` -> ``(m, e)``."""
    p1 = p1[:, None, :]
    p2 = p2[:, None, :]
    q1 = q1[None, :, :]
    q2 = q2[None, :, :]

    def orient(o, a, b):
        return _cross(a[..., 0] - o[..., 0], a[..., 1] - o[..., 1], b[..., 0] - o[..., 0], b[..., 1] - o[..., 1])

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    proper = (d1 * d2 < 0) & (d3 * d4 < 0)

    def on_seg(o, a, b, d):
        lo = np.minimum(o, a)
        hi = np.maximum(o, a)
        inside = (b[..., 0] >= lo[..., 0]) & (b[..., 0] <= hi[..., 0]) & (b[..., 1] >= lo[..., 1]) & (b[..., 1] <= hi[..., 1])
        return (d == 0) & inside

    touch = on_seg(q1, q2, p1, d1) | on_seg(q1, q2, p2, d2) | on_seg(p1, p2, q1, d3) | on_seg(p1, p2, q2, d4)
    return proper | touch


def polygon_is_simple(poly: np.ndarray) -> bool:
    k = len(poly)
    a = poly
    b = np.roll(poly, -1, axis=0)
    hits = segments_intersect(a, b, a, b)
    for i in range(k):
        for j in range(k):
            if i == j or (j - i) % k in (1, k - 1):
                continue
            if hits[i, j]:
                return False
    return True


# ---------------------------------------------------------------------------
# scene


@dataclass(frozen=True)
class Scene:
    """Workspace, state bounds, per-axis acceleration bounds and robot."""

    q_bounds: np.ndarray
    v_bounds: np.ndarray
    accel: np.ndarray
    obstacles: tuple = ()
    robot: RobotModel = field(default_factory=PlanarPoint)
    resolution: float | None = None
    name: str = ""
    _edges: tuple = field(default=(), repr=False, compare=False)
    _edge_starts: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        qb = np.array(self.q_bounds, dtype=float)
        vb = np.array(self.v_bounds, dtype=float)
        ab = np.array(self.accel, dtype=float)
        n = qb.shape[0]
        for label, arr in (("q_bounds", qb), ("v_bounds", vb), ("accel_bounds", ab)):
            if arr.ndim != 2 or arr.shape != (n, 2):
                raise ValueError(f"{label} must have shape ({n}, 2), got {arr.shape}")
        if not np.all(qb[:, 0] < qb[:, 1]):
            raise ValueError("q_bounds intervals must be nonempty")
        if not np.all(vb[:, 0] < vb[:, 1]):
            raise ValueError("v_bounds intervals must be nonempty")
        if not (np.all(ab[:, 0] < 0) and np.all(ab[:, 1] > 0)):
            raise ValueError("accel_bounds must straddle zero on every axis")
        if isinstance(self.robot, PlanarPoint) and n != 2:
            raise ValueError(f"a planar point robot needs 2 axes, scene has {n}")
        if isinstance(self.robot, PlanarChain) and n != self.robot.links:
            raise ValueError(f"chain has {self.robot.links} links but scene has {n} axes")
        polys = []
        for k, poly in enumerate(self.obstacles):
            p = np.array(poly, dtype=float)
            if p.ndim != 2 or p.shape[1] != 2:
                raise ValueError(f"obstacle {k}: vertices must be 2D points")
            if p.shape[0] < 3:
                raise ValueError(f"obstacle {k}: polygon needs at least 3 vertices, got {p.shape[0]}")
            if not polygon_is_simple(p):
                raise ValueError(f"obstacle {k}: polygon is self-intersecting")
            p.flags.writeable = False
            polys.append(p)
        for arr in (qb, vb, ab):
            arr.flags.writeable = False
        object.__setattr__(self, "q_bounds", qb)
        object.__setattr__(self, "v_bounds", vb)
        object.__setattr__(self, "accel", ab)
        object.__setattr__(self, "obstacles", tuple(polys))
        if polys:
            a = np.vstack(polys)
            b = np.vstack([np.roll(p, -1, axis=0) for p in polys])
        else:
            a = b = np.empty((0, 2))
        object.__setattr__(self, "_edges", (a, b))
        offsets = np.cumsum([0] + [len(p) for p in polys[:-1]]) if polys else np.zeros(0, int)
        object.__setattr__(self, "_edge_starts", np.asarray(offsets, dtype=int))
        if self.resolution is None:
            res = 0.05 if isinstance(self.robot, PlanarChain) else 4.0
            object.__setattr__(self, "resolution", res)

    @property
    def n_dims(self) -> int:
        return self.q_bounds.shape[0]

    @property
    def bounds(self) -> np.ndarray:
        """Acceleration bounds as an ``(n, 2)`` array of ``(a_min, a_max)``."""
        return self.accel


def fk_chain(robot: PlanarChain, q) -> np.ndarray:
    """Workspace segments of the chain, shape ``(links, 2, 2)``."""
    joints = _chain_joints(robot, np.asarray(q, dtype=float)[None, :])[0]
    return np.stack([joints[:-1], joints[1:]], axis=1)


def _chain_joints(robot: PlanarChain, Q: np.ndarray) -> np.ndarray:
    if Q.shape[1] != robot.links:
        raise ValueError(f"expected {robot.links} joint angles, got {Q.shape[1]}")
    theta = np.cumsum(Q, axis=1)
    steps = robot.link_length * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    base = np.asarray(robot.base, dtype=float)
    joints = np.concatenate([np.broadcast_to(base, (Q.shape[0], 1, 2)), base + np.cumsum(steps, axis=1)], axis=1)
    return joints


def within_bounds(scene: Scene, Q: np.ndarray) -> np.ndarray:
    lo = scene.q_bounds[:, 0]
    hi = scene.q_bounds[:, 1]
    return np.all((Q >= lo) & (Q <= hi), axis=1)


def configs_free(scene: Scene, Q) -> np.ndarray:
    """Vectorised ``config_free`` over an ``(m, n)`` batch."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    free = within_bounds(scene, Q)
    if not scene.obstacles and not _self_check(scene):
        return free
    robot = scene.robot
    idx = np.flatnonzero(free)
    if idx.size == 0:
        return free
    Qf = Q[idx]
    ea, eb = scene._edges
    if isinstance(robot, PlanarPoint):
        hit = _inside_any(scene, Qf)
        if robot.radius > 0 and len(ea):
            hit |= (point_segment_distance(Qf, ea, eb) < robot.radius).any(axis=1)
    else:
        joints = _chain_joints(robot, Qf)
        m, n1, _ = joints.shape
        hit = np.zeros(m, dtype=bool)
        if scene.obstacles:
            pts = joints.reshape(-1, 2)
            inside = _inside_any(scene, pts)
            hit |= inside.reshape(m, n1).any(axis=1)
            p1 = joints[:, :-1].reshape(-1, 2)
            p2 = joints[:, 1:].reshape(-1, 2)
            crosses = segments_intersect(p1, p2, ea, eb).any(axis=1)
            hit |= crosses.reshape(m, n1 - 1).any(axis=1)
        if robot.self_collision and robot.links > 2:
            hit |= _self_hits(joints)
    free[idx] = ~hit
    return free


def _self_check(scene: Scene) -> bool:
    return isinstance(scene.robot, PlanarChain) and scene.robot.self_collision


def _self_hits(joints: np.ndarray) -> np.ndarray:
    m, n1, _ = joints.shape
    n = n1 - 1
    ii, jj = np.triu_indices(n, k=2)
    out = np.zeros(m, dtype=bool)
    for k in range(m):
        a1, a2 = joints[k, :-1], joints[k, 1:]
        x = segments_intersect(a1, a2, a1, a2)
        out[k] = bool(x[ii, jj].any())
    return out


def config_free(scene: Scene, q) -> bool:
    return bool(configs_free(scene, np.asarray(q, dtype=float)[None, :])[0])


def states_valid(scene: Scene, Q: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Configuration freedom plus velocity bounds for each row."""
    lo = scene.v_bounds[:, 0]
    hi = scene.v_bounds[:, 1]
    tol = 1e-9 * np.maximum(1.0, np.abs(scene.v_bounds)).max()
    ok = np.all((V >= lo - tol) & (V <= hi + tol), axis=1)
    if np.any(ok):
        idx = np.flatnonzero(ok)
        ok[idx] = configs_free(scene, Q[idx])
    return ok


def sample_times(traj: Trajectory, resolution: float, min_step: float = 1e-4) -> np.ndarray:
    """Check times such that no axis moves more than ``resolution`` between them.

    Velocity is linear between switch times, so the distance an axis covers
    in an interval is at most its larger endpoint speed times the length.
    The switch times themselves are always included, which is where speed
    peaks.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if traj.duration == 0.0:
        return np.array([0.0])
    bp = traj.breakpoints()
    _, V = traj.sample(bp)
    speed = np.abs(V).max(axis=1)
    dt = np.diff(bp)
    reach = np.maximum(speed[:-1], speed[1:]) * dt
    counts = np.maximum(1, np.ceil(reach / resolution)).astype(int)
    counts = np.minimum(counts, np.maximum(1, np.floor(dt / min_step)).astype(int))
    pieces = [np.array([0.0])]
    for t0, h, c in zip(bp[:-1], dt, counts):
        pieces.append(t0 + h * np.arange(1, c + 1) / c)
    ts = np.concatenate(pieces)
    ts[-1] = traj.duration
    return ts


def first_invalid_state(scene: Scene, Q: np.ndarray, V: np.ndarray) -> tuple[int, int]:
    """First invalid row of a sampled state sequence (``-1`` if none) and checks used."""
    for s in range(0, len(Q), _CHUNK):
        ok = states_valid(scene, Q[s : s + _CHUNK], V[s : s + _CHUNK])
        if not ok.all():
            k = s + int(np.argmin(ok))
            return k, k + 1
    return -1, len(Q)


def first_violation(scene: Scene, traj: Trajectory, times: np.ndarray, reverse: bool = False) -> tuple[int, int]:
    """Index of the first invalid sample in walk order (``-1`` if none) and checks used.

    Walk order is increasing time, or decreasing with ``reverse``.
    """
    order = times[::-1] if reverse else times
    checks = 0
    for s in range(0, len(order), _CHUNK):
        chunk = order[s : s + _CHUNK]
        Q, V = traj.sample(chunk)
        ok = states_valid(scene, Q, V)
        if not ok.all():
            j = int(np.argmin(ok))
            checks += j + 1
            k = s + j
            return (len(times) - 1 - k if reverse else k), checks
        checks += len(chunk)
    return -1, checks


def trajectory_free(scene: Scene, traj: Trajectory, resolution: float | None = None) -> CollisionReport:
    """Sampled collision and state-bound check of a whole trajectory."""
    res = scene.resolution if resolution is None else resolution
    ts = sample_times(traj, res)
    k, checks = first_violation(scene, traj, ts)
    if k < 0:
        return CollisionReport(True, None, checks)
    return CollisionReport(False, float(ts[k]), checks)
