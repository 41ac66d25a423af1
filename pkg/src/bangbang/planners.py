"""Sampling-based planners.

* ``bb_rrt_bidirectional``: balanced bidirectional RRT whose metric and
  steering are the exact bang-bang solutions from :mod:`bangbang.steering`.
* ``baseline_rrt_bidirectional``: the classic kinodynamic RRT with a
  weighted Euclidean metric, a discrete set of constant accelerations held
  for a fixed time, and approximate tree connection.
* ``rrt_connect_geometric``: RRT-Connect on configurations only.

The goal tree of both kinodynamic planners stores edges that run forward in
time *into* the tree, i.e. each goal-tree edge starts at the child and ends
at its parent, so the final path can be executed front to back.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .steering import PhaseState, _profiles, _sweep, as_bounds, steer_nd
from .trajectory import Trajectory
from .world import (
    PlanarPoint,
    Scene,
    configs_free,
    first_invalid_state,
    first_violation,
    sample_times,
    segments_intersect,
    states_valid,
    trajectory_free,
)

# one intermediate tree node per this many collision checks along an edge
NODE_EVERY = 12
SOLUTION = "solution"
FAILURE = "failure"


class InvalidQuery(ValueError):
    pass


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator; the stream is fixed across platforms."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class PlanQuery:
    scene: Scene
    x_I: PhaseState
    x_G: PhaseState
    max_iterations: int = 10_000
    rng_seed: int = 0
    metric: str = "rho1"
    resolution: float | None = None

    def __post_init__(self):
        if self.metric not in ("rho1", "rho2"):
            raise ValueError(f"unknown metric {self.metric!r}")
        for name in ("x_I", "x_G"):
            x = getattr(self, name)
            if not isinstance(x, PhaseState):
                object.__setattr__(self, name, PhaseState(*x))


@dataclass
class PlanStats:
    iterations: int = 0
    nodes: int = 0
    collision_checks: int = 0
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)


@dataclass
class PlanResult:
    outcome: str
    trajectory: Trajectory | None
    stats: PlanStats
    trees: list = field(default_factory=list, repr=False)

    @property
    def solved(self) -> bool:
        return self.outcome == SOLUTION


def check_endpoints(scene: Scene, *states: PhaseState) -> None:
    for x in states:
        if x.dim != scene.n_dims:
            raise InvalidQuery(f"state has {x.dim} axes, scene has {scene.n_dims}")
        if not states_valid(scene, x.q[None, :], x.q_dot[None, :])[0]:
            raise InvalidQuery(f"state {x!r} is in collision or outside the state bounds")


# ---------------------------------------------------------------------------
# bang-bang RRT


class _Rows:
    """Append-only 2D array with amortised growth."""

    def __init__(self, first: np.ndarray):
        self._buf = np.empty((64, first.shape[0]))
        self._buf[0] = first
        self.size = 1

    def append(self, row) -> None:
        if self.size == self._buf.shape[0]:
            self._buf = np.vstack([self._buf, np.empty_like(self._buf)])
        self._buf[self.size] = row
        self.size += 1

    @property
    def view(self) -> np.ndarray:
        return self._buf[: self.size]


class _Tree:
    """States in growable arrays plus parent links and incoming edges."""

    def __init__(self, root: PhaseState, reverse: bool):
        self.reverse = reverse
        self._q = _Rows(root.q)
        self._v = _Rows(root.q_dot)
        self.states = [root]
        self.parent = [-1]
        self.edge: list = [None]

    def __len__(self):
        return len(self.states)

    @property
    def Q(self):
        return self._q.view

    @property
    def V(self):
        return self._v.view

    def add(self, x: PhaseState, parent: int, edge) -> int:
        self._q.append(x.q)
        self._v.append(x.q_dot)
        self.states.append(x)
        self.parent.append(parent)
        self.edge.append(edge)
        return len(self.states) - 1

    def chain(self, k: int) -> list:
        out = []
        while k >= 0:
            out.append(k)
            k = self.parent[k]
        return out


def _metric_values(Q, V, target: PhaseState, a_min, a_max, metric: str, reverse: bool) -> np.ndarray:
    qt = target.q[None, :]
    vt = target.q_dot[None, :]
    if reverse:
        p = _profiles(qt, vt, Q, V, a_min, a_max)
    else:
        p = _profiles(Q, V, qt, vt, a_min, a_max)
    d = p.t_star.max(axis=1)
    if metric == "rho2":
        rows = np.flatnonzero(p.has_gap.any(axis=1))
        for r in rows:
            d[r] = _sweep(p.t_star[r], p.t_limit[r], p.t_mirror[r], p.has_gap[r])
    return d


def bb_nearest(points, target: PhaseState, metric: str = "rho1", bounds=None, reverse: bool = False) -> PhaseState:
    """Point minimising the bang-bang time to ``target`` (from ``target`` if ``reverse``).

    Linear scan; ties go to the earliest point.
    """
    pts = list(points)
    if not pts:
        raise ValueError("nearest neighbour of an empty set")
    Q = np.array([p.q for p in pts])
    V = np.array([p.q_dot for p in pts])
    a_min, a_max = as_bounds(bounds, Q.shape[1])
    d = _metric_values(Q, V, target, a_min, a_max, metric, reverse)
    return pts[int(np.argmin(d))]


@dataclass
class SteerResult:
    reached: PhaseState
    trajectory: Trajectory
    exact: bool
    checks: int
    # check times along ``trajectory`` in walk order, excluding the start
    walked: np.ndarray


def bb_steer_checked(scene: Scene, frm: PhaseState, to: PhaseState, bounds=None,
                     resolution: float | None = None, reverse: bool = False) -> SteerResult:
    """Steer from ``frm`` toward ``to`` and stop before the first invalid sample.

    With ``reverse`` the motion is planned backwards in time from ``frm``:
    the returned trajectory runs from ``reached`` to ``frm``.
    """
    bounds = scene.accel if bounds is None else bounds
    res = scene.resolution if resolution is None else resolution
    if frm == to:
        return SteerResult(frm, Trajectory.stationary(frm), True, 0, np.empty(0))
    if reverse:
        traj = Trajectory.from_plan(to, steer_nd(to, frm, bounds))
    else:
        traj = Trajectory.from_plan(frm, steer_nd(frm, to, bounds))
    ts = sample_times(traj, res)
    T = traj.duration
    if reverse:
        walk = ts[:-1]
        k, checks = first_violation(scene, traj, walk, reverse=True)
        if k < 0:
            return SteerResult(to, traj, True, checks, walk[::-1])
        t_stop = ts[k + 1]
        if t_stop >= T:
            return SteerResult(frm, Trajectory.stationary(frm), False, checks, np.empty(0))
        part = traj.restrict(t_stop, T)
        done = walk[k + 1 :][::-1] - t_stop
        return SteerResult(part.x0, part, False, checks, done)
    walk = ts[1:]
    k, checks = first_violation(scene, traj, walk)
    if k < 0:
        return SteerResult(to, traj, True, checks, walk)
    t_stop = ts[k]
    if t_stop <= 0.0:
        return SteerResult(frm, Trajectory.stationary(frm), False, checks, np.empty(0))
    part = traj.restrict(0.0, t_stop)
    return SteerResult(part.end_state, part, False, checks, walk[:k])


def _insert_edge(tree: _Tree, parent: int, res: SteerResult) -> int:
    """Add the steered edge to ``tree`` with a node every ``NODE_EVERY`` checks.

    Edges are stored as ``(trajectory, t_lo, t_hi)`` and only cut out of the
    full steering trajectory when a solution is assembled.
    Returns the index of the node holding ``res.reached``.
    """
    traj = res.trajectory
    T = traj.duration
    cut = res.walked[NODE_EVERY - 1 :: NODE_EVERY]
    cut = cut[(cut > 0.0) & (cut < T)]
    if len(cut):
        Q, V = traj.sample(cut)
    prev = parent
    if tree.reverse:
        # walking backwards from T; the last cut is where the edge ends
        t_prev = T
        for j, t in enumerate(cut):
            prev = tree.add(PhaseState(Q[j], V[j]), prev, (traj, t, t_prev))
            t_prev = t
        if t_prev > 0.0:
            prev = tree.add(res.reached, prev, (traj, 0.0, t_prev))
        return prev
    t_prev = 0.0
    for j, t in enumerate(cut):
        prev = tree.add(PhaseState(Q[j], V[j]), prev, (traj, t_prev, t))
        t_prev = t
    if t_prev < T:
        prev = tree.add(res.reached, prev, (traj, t_prev, T))
    return prev


def _extend(scene, tree: _Tree, target: PhaseState, metric, a_min, a_max, res, stats) -> tuple[int, bool] | None:
    d = _metric_values(tree.Q, tree.V, target, a_min, a_max, metric, tree.reverse)
    near = int(np.argmin(d))
    sr = bb_steer_checked(scene, tree.states[near], target, scene.accel, res, reverse=tree.reverse)
    stats.collision_checks += sr.checks
    if sr.trajectory.duration == 0.0:
        return (near, True) if sr.exact else None
    k = _insert_edge(tree, near, sr)
    return k, sr.exact


def _edge_piece(edge) -> Trajectory:
    traj, lo, hi = edge
    if lo == 0.0 and hi == traj.duration:
        return traj
    return traj.restrict(lo, hi)


def _join(start: _Tree, s_idx: int, goal: _Tree, g_idx: int) -> Trajectory:
    edges = [start.edge[k] for k in reversed(start.chain(s_idx)) if start.edge[k] is not None]
    edges += [goal.edge[k] for k in goal.chain(g_idx) if goal.edge[k] is not None]
    if not edges:
        return Trajectory.stationary(start.states[0])
    return Trajectory.join([_edge_piece(e) for e in edges])


def _validated(scene, traj, res, stats) -> bool:
    """Check the assembled trajectory on its own sample grid.

    Edges were checked on their own grids; a shallow corner clip can show
    up on the joined trajectory's grid, and such joins are not returned.
    """
    rep = trajectory_free(scene, traj, res)
    stats.collision_checks += rep.checks_performed
    if not rep.free:
        stats.extra["rejected_joins"] = stats.extra.get("rejected_joins", 0) + 1
    return rep.free


def bb_rrt_bidirectional(query: PlanQuery, keep_trees: bool = False) -> PlanResult:
    """Bidirectional RRT with bang-bang metric and steering."""
    scene = query.scene
    check_endpoints(scene, query.x_I, query.x_G)
    stats = PlanStats()
    t0 = time.perf_counter()
    res = scene.resolution if query.resolution is None else query.resolution
    a_min, a_max = as_bounds(scene.accel, scene.n_dims)
    rng = make_rng(query.rng_seed)
    start = _Tree(query.x_I, reverse=False)
    goal = _Tree(query.x_G, reverse=True)

    def finish(outcome, traj):
        stats.wall_time = time.perf_counter() - t0
        stats.nodes = len(start) + len(goal)
        trees = [start, goal] if keep_trees else []
        return PlanResult(outcome, traj, stats, trees)

    if query.x_I == query.x_G:
        return finish(SOLUTION, Trajectory.stationary(query.x_I))

    qlo, qhi = scene.q_bounds[:, 0], scene.q_bounds[:, 1]
    vlo, vhi = scene.v_bounds[:, 0], scene.v_bounds[:, 1]
    ta, tb = start, goal
    for i in range(1, query.max_iterations + 1):
        stats.iterations = i
        alpha = PhaseState(rng.uniform(qlo, qhi), rng.uniform(vlo, vhi))
        ext = _extend(scene, ta, alpha, query.metric, a_min, a_max, res, stats)
        if ext is not None:
            ka, _ = ext
            x_s = ta.states[ka]
            con = _extend(scene, tb, x_s, query.metric, a_min, a_max, res, stats)
            if con is not None and con[1]:
                kb = con[0]
                if ta is start:
                    traj = _join(start, ka, goal, kb)
                else:
                    traj = _join(start, kb, goal, ka)
                if _validated(scene, traj, res, stats):
                    return finish(SOLUTION, traj)
        if len(tb) > len(ta):
            ta, tb = tb, ta
    return finish(FAILURE, None)


# ---------------------------------------------------------------------------
# constant-control baseline


def action_set(bounds, count: int = 24) -> np.ndarray:
    """``count`` accelerations evenly spaced by angle on the boundary of the bound rectangle."""
    a_min, a_max = as_bounds(bounds)
    if len(a_min) != 2:
        raise ValueError("the angular action set is defined for two axes")
    ang = 2.0 * math.pi * np.arange(count) / count
    d = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    lim = np.where(d >= 0, a_max, -a_min)
    with np.errstate(divide="ignore"):
        scale = np.min(np.where(np.abs(d) > 1e-15, lim / np.abs(d), np.inf), axis=1)
    return d * scale[:, None]


class _BaselineTree:
    def __init__(self, root: PhaseState, reverse: bool):
        self.reverse = reverse
        self.Q = [root.q]
        self.V = [root.q_dot]
        self.parent = [-1]
        self.accel = [None]
        self._q = _Rows(root.q)
        self._v = _Rows(root.q_dot)

    def __len__(self):
        return len(self.Q)

    @property
    def _Qa(self):
        return self._q.view

    @property
    def _Va(self):
        return self._v.view

    def add(self, q, v, parent, a):
        self.Q.append(q)
        self.V.append(v)
        self.parent.append(parent)
        self.accel.append(a)
        self._q.append(q)
        self._v.append(v)
        return len(self.Q) - 1


def _weighted_d2(Q, V, q, v, w):
    return ((Q - q) ** 2).sum(axis=1) + (w * w) * ((V - v) ** 2).sum(axis=1)


def _baseline_extend(scene, tree: _BaselineTree, q_t, v_t, actions, dt, w, res, stats, batch=False):
    near = int(np.argmin(_weighted_d2(tree._Qa, tree._Va, q_t, v_t, w)))
    q0, v0 = tree._Qa[near], tree._Va[near]
    if tree.reverse:
        # predecessor states: applying a for dt from there arrives at (q0, v0)
        starts_q = q0[None] - v0[None] * dt + 0.5 * actions * dt * dt
        starts_v = v0[None] - actions * dt
    else:
        starts_q = np.broadcast_to(q0, actions.shape)
        starts_v = np.broadcast_to(v0, actions.shape)
    vmax = np.maximum(np.abs(starts_v), np.abs(starts_v + actions * dt)).max()
    m = max(1, int(math.ceil(vmax * dt / res)))
    taus = dt * np.arange(1, m + 1) / m
    if tree.reverse:
        taus = dt * np.arange(0, m) / m
    # (actions, samples, axes)
    Qs = starts_q[:, None, :] + starts_v[:, None, :] * taus[None, :, None] + 0.5 * actions[:, None, :] * taus[None, :, None] ** 2
    Vs = starts_v[:, None, :] + actions[:, None, :] * taus[None, :, None]
    if tree.reverse:
        # walk away from the tree node
        Qs = Qs[:, ::-1]
        Vs = Vs[:, ::-1]
    if batch:
        ok = states_valid(scene, Qs.reshape(-1, Qs.shape[-1]), Vs.reshape(-1, Vs.shape[-1])).reshape(len(actions), m)
        good = ok.all(axis=1)
        first_bad = np.where(good, m, np.argmin(ok, axis=1) + 1)
        stats.collision_checks += int(first_bad.sum())
    else:
        # one action at a time, stopping at its first invalid sample
        good = np.zeros(len(actions), dtype=bool)
        for j in range(len(actions)):
            k, checks = first_invalid_state(scene, Qs[j], Vs[j])
            stats.collision_checks += checks
            good[j] = k < 0
    if not np.any(good):
        return None
    if tree.reverse:
        new_q, new_v = starts_q, starts_v
    else:
        new_q = q0[None] + v0[None] * dt + 0.5 * actions * dt * dt
        new_v = v0[None] + actions * dt
    d = _weighted_d2(new_q, new_v, q_t, v_t, w)
    d = np.where(good, d, np.inf)
    j = int(np.argmin(d))
    return tree.add(new_q[j].copy(), new_v[j].copy(), near, actions[j].copy())


def _within(q1, v1, q2, v2, tol_q, tol_v):
    return bool(np.all(np.abs(q1 - q2) <= tol_q) and np.all(np.abs(v1 - v2) <= tol_v))


def baseline_rrt_bidirectional(query: PlanQuery, action_count: int = 24, delta_t: float = 5.0,
                               connect_tol=(5.0, 2.0), velocity_weight: float = 17.32,
                               keep_trees: bool = False, batch_actions: bool = False) -> PlanResult:
    """Kinodynamic RRT-Bi with constant actions and a weighted Euclidean metric.

    Each action is simulated and checked on its own, stopping at its first
    invalid sample, with the same state checker the bang-bang planner uses.
    ``batch_actions`` checks all actions in one vectorised call instead; it
    gives the same tree but runs much faster in numpy.
    """
    scene = query.scene
    check_endpoints(scene, query.x_I, query.x_G)
    stats = PlanStats()
    t0 = time.perf_counter()
    res = scene.resolution if query.resolution is None else query.resolution
    actions = action_set(scene.accel, action_count)
    rng = make_rng(query.rng_seed)
    start = _BaselineTree(query.x_I, reverse=False)
    goal = _BaselineTree(query.x_G, reverse=True)
    tol_q, tol_v = connect_tol
    w = velocity_weight

    def finish(outcome, traj, gap=None):
        stats.wall_time = time.perf_counter() - t0
        stats.nodes = len(start) + len(goal)
        if gap is not None:
            stats.extra["connection_gap"] = gap
        return PlanResult(outcome, traj, stats, [start, goal] if keep_trees else [])

    if _within(query.x_I.q, query.x_I.q_dot, query.x_G.q, query.x_G.q_dot, tol_q, tol_v):
        traj = Trajectory.stationary(query.x_I)
        gap = float(max(np.abs(query.x_I.q - query.x_G.q).max(), np.abs(query.x_I.q_dot - query.x_G.q_dot).max()))
        return finish(SOLUTION, traj, gap)

    qlo, qhi = scene.q_bounds[:, 0], scene.q_bounds[:, 1]
    vlo, vhi = scene.v_bounds[:, 0], scene.v_bounds[:, 1]
    ta, tb = start, goal
    for i in range(1, query.max_iterations + 1):
        stats.iterations = i
        q_r = rng.uniform(qlo, qhi)
        v_r = rng.uniform(vlo, vhi)
        ka = _baseline_extend(scene, ta, q_r, v_r, actions, delta_t, w, res, stats, batch_actions)
        if ka is not None:
            qa, va = ta.Q[ka], ta.V[ka]
            kb = _baseline_extend(scene, tb, qa, va, actions, delta_t, w, res, stats, batch_actions)
            if kb is not None and _within(qa, va, tb.Q[kb], tb.V[kb], tol_q, tol_v):
                s_idx, g_idx = (ka, kb) if ta is start else (kb, ka)
                traj, gap = _baseline_path(start, s_idx, goal, g_idx, delta_t)
                if _validated(scene, traj, res, stats):
                    return finish(SOLUTION, traj, gap)
        if len(tb) > len(ta):
            ta, tb = tb, ta
    return finish(FAILURE, None)


def _baseline_path(start, s_idx, goal, g_idx, dt):
    seq = []
    k = s_idx
    while start.parent[k] >= 0:
        seq.append(start.accel[k])
        k = start.parent[k]
    seq.reverse()
    k = g_idx
    while goal.parent[k] >= 0:
        seq.append(goal.accel[k])
        k = goal.parent[k]
    n = len(start.Q[0])
    x0 = PhaseState(start.Q[0], start.V[0])
    gap = float(max(np.abs(start.Q[s_idx] - goal.Q[g_idx]).max(), np.abs(start.V[s_idx] - goal.V[g_idx]).max()))
    if not seq:
        return Trajectory.stationary(x0), gap
    controls = [[(float(a[i]), dt) for a in seq] for i in range(n)]
    return Trajectory(x0, controls), gap


# ---------------------------------------------------------------------------
# geometric RRT-Connect


@dataclass
class GeometricResult:
    path: np.ndarray | None
    stats: PlanStats

    @property
    def solved(self) -> bool:
        return self.path is not None


def _segment_free(scene: Scene, a: np.ndarray, b: np.ndarray, res: float, stats: PlanStats) -> bool:
    m = max(1, int(math.ceil(np.abs(b - a).max() / res)))
    s = np.arange(1, m + 1)[:, None] / m
    pts = a[None] + s * (b - a)[None]
    ok = configs_free(scene, pts)
    if not ok.all():
        stats.collision_checks += int(np.argmin(ok)) + 1
        return False
    stats.collision_checks += m
    robot = scene.robot
    if isinstance(robot, PlanarPoint) and robot.radius == 0.0 and scene.obstacles:
        # a point moves along the segment itself, so test it against obstacle edges exactly
        ea, eb = scene._edges
        if segments_intersect(a[None], b[None], ea, eb).any():
            return False
    return True


class _GeoTree:
    def __init__(self, root):
        self.pts = [np.asarray(root, dtype=float)]
        self.parent = [-1]
        self._arr = _Rows(self.pts[0])

    def add(self, q, parent):
        self.pts.append(q)
        self.parent.append(parent)
        self._arr.append(q)
        return len(self.pts) - 1

    def nearest(self, q):
        return int(np.argmin(((self._arr.view - q) ** 2).sum(axis=1)))

    def chain(self, k):
        out = []
        while k >= 0:
            out.append(self.pts[k])
            k = self.parent[k]
        return out


_TRAPPED, _ADVANCED, _REACHED = 0, 1, 2


def _geo_extend(scene, tree: _GeoTree, q, step, res, stats):
    k = tree.nearest(q)
    qn = tree.pts[k]
    d = q - qn
    dist = float(np.linalg.norm(d))
    if dist <= step:
        q_new, status = q, _REACHED
    else:
        q_new, status = qn + d * (step / dist), _ADVANCED
    if dist == 0.0:
        return _REACHED, k
    if not _segment_free(scene, qn, q_new, res, stats):
        return _TRAPPED, -1
    return status, tree.add(np.array(q_new, dtype=float), k)


def rrt_connect_geometric(scene: Scene, q_I, q_G, step: float, seed: int = 0,
                          max_iterations: int = 10_000, resolution: float | None = None) -> GeometricResult:
    """RRT-Connect on configurations; returns the polyline vertices from ``q_I`` to ``q_G``."""
    q_I = np.asarray(q_I, dtype=float)
    q_G = np.asarray(q_G, dtype=float)
    for q in (q_I, q_G):
        if not configs_free(scene, q[None])[0]:
            raise InvalidQuery(f"configuration {q.tolist()} is not free")
    stats = PlanStats()
    t0 = time.perf_counter()
    res = scene.resolution if resolution is None else resolution
    rng = make_rng(seed)
    start, goal = _GeoTree(q_I), _GeoTree(q_G)

    def finish(path):
        stats.wall_time = time.perf_counter() - t0
        stats.nodes = len(start.pts) + len(goal.pts)
        return GeometricResult(path, stats)

    if np.array_equal(q_I, q_G):
        return finish(q_I[None].copy())
    if _segment_free(scene, q_I, q_G, res, stats):
        return finish(np.array([q_I, q_G]))
    lo, hi = scene.q_bounds[:, 0], scene.q_bounds[:, 1]
    ta, tb = start, goal
    for i in range(1, max_iterations + 1):
        stats.iterations = i
        q_r = rng.uniform(lo, hi)
        status, ka = _geo_extend(scene, ta, q_r, step, res, stats)
        if status != _TRAPPED:
            q_new = ta.pts[ka]
            while True:
                s, kb = _geo_extend(scene, tb, q_new, step, res, stats)
                if s != _ADVANCED:
                    break
            if s == _REACHED:
                sa, sb = (ka, kb) if ta is start else (kb, ka)
                head = start.chain(sa)[::-1]
                tail = goal.chain(sb)[1:]
                return finish(np.array(head + tail))
        ta, tb = tb, ta
    return finish(None)
