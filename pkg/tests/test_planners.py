import math

import numpy as np
import pytest

from bangbang import (
    InvalidQuery,
    PhaseState,
    PlanQuery,
    Scene,
    Trajectory,
    baseline_rrt_bidirectional,
    bb_nearest,
    bb_rrt_bidirectional,
    bb_steer_checked,
    rho1,
    rho2,
    rrt_connect_geometric,
    steer_nd,
    trajectory_free,
)
from bangbang.io import dumps_trajectory, load_scene_file
from bangbang.planners import action_set, make_rng
from bangbang.world import configs_free, point_segment_distance, points_in_polygon, sample_times

WALL = [(45, 0), (55, 0), (55, 70), (45, 70)]


def plane(obstacles=()):
    return Scene(
        q_bounds=[(0, 100), (0, 100)],
        v_bounds=[(-10, 10), (-10, 10)],
        accel=[(-1, 1), (-1, 1)],
        obstacles=obstacles,
        resolution=2.0,
    )


def rest(q):
    return PhaseState(q, [0.0] * len(q))


def wall_query(seed=0, **kw):
    return PlanQuery(plane([WALL]), rest([20, 20]), rest([80, 20]), rng_seed=seed, **kw)


def check_solution(query, result, tol_end=1e-9):
    """Endpoints exact, free at the planner's resolution, and any clip at a
    ten-times-finer resolution shallower than that resolution."""
    assert result.solved
    traj = result.trajectory
    scene = query.scene
    assert traj.x0.allclose(query.x_I, atol=1e-12)
    end = traj.end_state
    assert np.abs(end.q - query.x_G.q).max() <= tol_end
    assert np.abs(end.q_dot - query.x_G.q_dot).max() <= tol_end
    assert trajectory_free(scene, traj).free
    assert penetration_depth(scene, traj, scene.resolution / 50) <= scene.resolution


def penetration_depth(scene, traj, step):
    """Deepest excursion into any obstacle on a dense sampling."""
    Q, _ = traj.sample(sample_times(traj, step, min_step=1e-9))
    depth = 0.0
    for poly in scene.obstacles:
        inside = points_in_polygon(Q, poly)
        if inside.any():
            d = point_segment_distance(Q[inside], poly, np.roll(poly, -1, axis=0)).min(axis=1)
            depth = max(depth, float(d.max()))
    return depth


class TestNearest:
    B = (-1, 1)

    def test_singleton(self):
        p = PhaseState([3.0], [1.0])
        assert bb_nearest([p], PhaseState([0.0], [0.0]), bounds=self.B) is p

    def test_closer_in_time(self):
        a, b = PhaseState([0.0], [0.0]), PhaseState([0.9], [0.0])
        assert bb_nearest([a, b], PhaseState([1.0], [0.0]), bounds=self.B) is b

    def test_contains_target(self):
        t = PhaseState([1.0], [0.5])
        pts = [PhaseState([0.0], [0.0]), PhaseState([1.0], [0.5]), PhaseState([2.0], [0.0])]
        assert bb_nearest(pts, t, bounds=self.B) is pts[1]

    def test_ties_go_to_first(self):
        pts = [PhaseState([-1.0], [0.0]), PhaseState([1.0], [0.0])]
        assert bb_nearest(pts, PhaseState([0.0], [0.0]), bounds=self.B) is pts[0]

    def test_direction_matters(self):
        # (2, 2) is reached from rest at the origin in 2 s, but braking back takes longer
        target = PhaseState([0.0], [0.0])
        moving = PhaseState([2.0], [2.0])
        still = PhaseState([3.0], [0.0])
        assert bb_nearest([moving, still], target, bounds=self.B) is still
        assert bb_nearest([moving, still], target, bounds=self.B, reverse=True) is moving

    def test_empty(self):
        with pytest.raises(ValueError):
            bb_nearest([], PhaseState([0.0], [0.0]), bounds=self.B)

    def test_rho2_at_least_rho1(self):
        rng = np.random.default_rng(0)
        for _ in range(500):
            x = PhaseState(rng.uniform(-5, 5, 3), rng.uniform(-3, 3, 3))
            y = PhaseState(rng.uniform(-5, 5, 3), rng.uniform(-3, 3, 3))
            assert rho2(x, y, (-1, 1)) >= rho1(x, y, (-1, 1)) - 1e-12


class TestSteerChecked:
    def test_empty_reaches_exactly(self):
        s = plane()
        frm, to = PhaseState([10, 10], [1, 0]), PhaseState([60, 70], [0, -2])
        r = bb_steer_checked(s, frm, to)
        assert r.exact and r.reached == to
        assert r.trajectory.end_state.allclose(to, atol=1e-9)

    def test_wall_stops_early(self):
        s = plane([WALL])
        r = bb_steer_checked(s, rest([20, 20]), rest([80, 20]))
        assert not r.exact and r.reached != rest([80, 20])
        assert r.reached.q[0] < 45
        assert trajectory_free(s, r.trajectory, resolution=0.2).free
        assert r.trajectory.end_state.allclose(r.reached)

    def test_same_state(self):
        x = rest([20, 20])
        r = bb_steer_checked(plane(), x, x)
        assert r.exact and r.reached == x and r.trajectory.duration == 0.0

    def test_reverse_runs_into_from(self):
        s = plane([WALL])
        frm = rest([80, 20])
        r = bb_steer_checked(s, frm, rest([20, 20]), reverse=True)
        assert not r.exact
        assert r.trajectory.end_state.allclose(frm, atol=1e-9)
        assert r.trajectory.x0.allclose(r.reached)
        assert r.reached.q[0] > 55
        assert trajectory_free(s, r.trajectory, resolution=0.2).free

    def test_first_step_blocked(self):
        s = plane([[(20.5, 0), (22, 0), (22, 100), (20.5, 100)]])
        frm = PhaseState([20, 50], [10, 0])
        r = bb_steer_checked(s, frm, rest([80, 50]))
        assert r.reached == frm and r.trajectory.duration == 0.0 and not r.exact


class TestBangBangRRT:
    def test_empty_scene_first_iteration(self):
        # no obstacles: the first connection attempt succeeds unless a steer leaves the state box
        s = plane()
        x_I, x_G = rest([10, 10]), PhaseState([90, 60], [2, -1])
        qualifying = 0
        for seed in range(20):
            rng = make_rng(seed)
            alpha = PhaseState(rng.uniform(0, 100, 2), rng.uniform(-10, 10, 2))
            legs = [Trajectory.from_plan(x_I, steer_nd(x_I, alpha, s.accel)),
                    Trajectory.from_plan(alpha, steer_nd(alpha, x_G, s.accel))]
            q = PlanQuery(s, x_I, x_G, rng_seed=seed)
            r = bb_rrt_bidirectional(q)
            check_solution(q, r)
            if all(trajectory_free(s, leg).free for leg in legs):
                qualifying += 1
                assert r.stats.iterations == 1
                assert r.trajectory.duration == pytest.approx(sum(leg.duration for leg in legs))
        assert qualifying >= 3

    def test_same_start_and_goal(self):
        x = rest([10, 10])
        r = bb_rrt_bidirectional(PlanQuery(plane(), x, x))
        assert r.solved and r.trajectory.duration == 0.0

    def test_start_in_collision(self):
        with pytest.raises(InvalidQuery):
            bb_rrt_bidirectional(PlanQuery(plane([WALL]), rest([50, 10]), rest([80, 20])))

    def test_start_too_fast(self):
        with pytest.raises(InvalidQuery):
            bb_rrt_bidirectional(PlanQuery(plane(), PhaseState([10, 10], [20, 0]), rest([80, 20])))

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("metric", ["rho1", "rho2"])
    def test_solution_valid(self, seed, metric):
        q = wall_query(seed, metric=metric)
        r = bb_rrt_bidirectional(q)
        check_solution(q, r)
        assert r.stats.nodes >= 2 and r.stats.collision_checks > 0 and r.stats.wall_time > 0

    @pytest.mark.xfail(strict=True, reason="sampled checking lets about 5% of solutions clip a corner "
                       "by less than the resolution; only the bounded-depth form is guaranteed")
    def test_every_solution_free_at_finer_resolution(self):
        for seed in range(20):
            q = wall_query(seed)
            r = bb_rrt_bidirectional(q)
            assert trajectory_free(q.scene, r.trajectory, resolution=q.scene.resolution / 10).free

    def test_failure_when_budget_too_small(self):
        r = bb_rrt_bidirectional(wall_query(0, max_iterations=1))
        assert not r.solved and r.trajectory is None and r.stats.iterations == 1

    def test_deterministic(self):
        a = bb_rrt_bidirectional(wall_query(3))
        b = bb_rrt_bidirectional(wall_query(3))
        assert dumps_trajectory(a.trajectory) == dumps_trajectory(b.trajectory)
        assert (a.stats.nodes, a.stats.collision_checks) == (b.stats.nodes, b.stats.collision_checks)

    def test_tree_consistency(self):
        r = bb_rrt_bidirectional(wall_query(1), keep_trees=True)
        start, goal = r.trees
        for tree in (start, goal):
            for k in range(1, len(tree)):
                traj, lo, hi = tree.edge[k]
                here, there = (lo, hi) if tree.reverse else (hi, lo)
                assert traj.evaluate(here).allclose(tree.states[k], atol=1e-9)
                assert traj.evaluate(there).allclose(tree.states[tree.parent[k]], atol=1e-9)
                np.testing.assert_array_equal(tree.Q[k], tree.states[k].q)

    def test_nodes_inserted_along_long_edges(self):
        # a long free edge at fine resolution yields intermediate nodes
        s = Scene([(0, 100)] * 2, [(-10, 10)] * 2, [(-1, 1)] * 2, resolution=0.5)
        q = PlanQuery(s, rest([5, 5]), rest([95, 95]))
        r = bb_rrt_bidirectional(q, keep_trees=True)
        start, goal = r.trees
        assert len(goal) > 2
        # each edge spans at most NODE_EVERY checks
        for k in range(1, len(goal)):
            traj, lo, hi = goal.edge[k]
            assert hi - lo > 0

    def test_shipped_maze(self):
        scene, query, _ = load_scene_file("maze_a")
        q = PlanQuery(scene, query.start, query.goal, rng_seed=0)
        r = bb_rrt_bidirectional(q)
        check_solution(q, r)


class TestBaseline:
    def test_action_set(self):
        acts = action_set([(-1, 1), (-1, 1)], 24)
        assert acts.shape == (24, 2)
        np.testing.assert_allclose(acts[0], [1, 0], atol=1e-15)
        np.testing.assert_allclose(acts[3], [1, 1])
        # all on the rectangle boundary
        np.testing.assert_allclose(np.abs(acts).max(axis=1), 1.0)
        ang = np.arctan2(acts[:, 1], acts[:, 0]) % (2 * math.pi)
        np.testing.assert_allclose(ang, 2 * math.pi * np.arange(24) / 24, atol=1e-12)

    def test_action_set_asymmetric(self):
        acts = action_set([(-2, 1), (-0.5, 3)], 24)
        assert acts[:, 0].max() == pytest.approx(1) and acts[:, 0].min() == pytest.approx(-2)
        assert acts[:, 1].max() == pytest.approx(3) and acts[:, 1].min() == pytest.approx(-0.5)

    def test_small_empty_instance(self):
        # maze-scale dynamics: velocity steps of 1.25 can meet the 2.0 tolerance
        s = Scene([(0, 400)] * 2, [(-10, 10)] * 2, [(-0.25, 0.25)] * 2)
        q = PlanQuery(s, rest([100, 200]), rest([300, 200]), max_iterations=5000, rng_seed=0)
        r = baseline_rrt_bidirectional(q, batch_actions=True)
        assert r.solved
        assert r.stats.extra["connection_gap"] <= 5.0
        end = r.trajectory.end_state
        assert np.abs(end.q - q.x_G.q).max() <= 5.0
        assert np.abs(end.q_dot - q.x_G.q_dot).max() <= 2.0
        assert r.trajectory.x0.allclose(q.x_I)
        assert trajectory_free(s, r.trajectory).free

    def test_batched_matches_sequential(self):
        q = PlanQuery(plane([WALL]), rest([20, 20]), rest([80, 20]), max_iterations=3000, rng_seed=2)
        a = baseline_rrt_bidirectional(q)
        b = baseline_rrt_bidirectional(q, batch_actions=True)
        assert a.solved == b.solved
        assert a.stats.nodes == b.stats.nodes
        if a.solved:
            assert dumps_trajectory(a.trajectory) == dumps_trajectory(b.trajectory)

    def test_tree_consistency(self):
        q = PlanQuery(plane([WALL]), rest([20, 20]), rest([80, 20]), max_iterations=3000, rng_seed=2)
        r = baseline_rrt_bidirectional(q, keep_trees=True, batch_actions=True)
        dt = 5.0
        for tree in r.trees:
            for k in range(1, len(tree)):
                p = tree.parent[k]
                a = tree.accel[k]
                if tree.reverse:
                    # applying a from the node arrives at the parent
                    q0, v0, q1, v1 = tree.Q[k], tree.V[k], tree.Q[p], tree.V[p]
                else:
                    q0, v0, q1, v1 = tree.Q[p], tree.V[p], tree.Q[k], tree.V[k]
                np.testing.assert_allclose(q0 + v0 * dt + 0.5 * a * dt * dt, q1, atol=1e-9)
                np.testing.assert_allclose(v0 + a * dt, v1, atol=1e-9)

    def test_start_in_collision(self):
        with pytest.raises(InvalidQuery):
            baseline_rrt_bidirectional(PlanQuery(plane([WALL]), rest([50, 10]), rest([80, 20])))

    def test_within_tolerance_immediately(self):
        r = baseline_rrt_bidirectional(PlanQuery(plane(), rest([20, 20]), rest([22, 21])))
        assert r.solved and r.trajectory.duration == 0.0
        assert r.stats.extra["connection_gap"] == 2.0


class TestGeometric:
    def test_empty_scene_direct(self):
        r = rrt_connect_geometric(plane(), [10, 10], [90, 90], step=10)
        np.testing.assert_array_equal(r.path, [[10, 10], [90, 90]])

    def test_same_point(self):
        r = rrt_connect_geometric(plane(), [10, 10], [10, 10], step=10)
        assert r.path.shape == (1, 2)

    def test_blocked_endpoint(self):
        with pytest.raises(InvalidQuery):
            rrt_connect_geometric(plane([WALL]), [50, 10], [90, 90], step=10)

    @pytest.mark.parametrize("seed", range(3))
    def test_maze_path_free_at_finer_resolution(self, seed):
        scene, query, raw = load_scene_file("maze_a")
        r = rrt_connect_geometric(scene, query.start.q, query.goal.q, step=raw["rrt_step"], seed=seed)
        assert r.solved
        path = r.path
        np.testing.assert_array_equal(path[0], query.start.q)
        np.testing.assert_array_equal(path[-1], query.goal.q)
        fine = scene.resolution / 10
        for a, b in zip(path[:-1], path[1:]):
            m = max(1, int(math.ceil(np.abs(b - a).max() / fine)))
            pts = a + np.linspace(0, 1, m + 1)[:, None] * (b - a)
            assert configs_free(scene, pts).all()

    def test_failure(self):
        # goal sealed inside a box
        box = [[(60, 60), (90, 60), (90, 62), (60, 62)], [(60, 88), (90, 88), (90, 90), (60, 90)],
               [(60, 62), (62, 62), (62, 88), (60, 88)], [(88, 62), (90, 62), (90, 88), (88, 88)]]
        r = rrt_connect_geometric(plane(box), [10, 10], [75, 75], step=10, max_iterations=200)
        assert not r.solved and r.stats.iterations == 200
