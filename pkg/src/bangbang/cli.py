"""Command-line front end.

Exit status: 0 on success, 1 when a planner fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .bench import METHODS, BenchSpec, run_bench
from .io import SceneError, load_scene_file, load_trajectory, save_trajectory, dumps_trajectory
from .optimize import GeometricConfig, ShortcutConfig, lift_and_optimize, optimize_trajectory
from .planners import InvalidQuery, PlanQuery, baseline_rrt_bidirectional, bb_rrt_bidirectional
from .render import PHASE, WORKSPACE, render_svg
from .steering import PhaseState, steer_nd
from .trajectory import Trajectory

EXIT_OK, EXIT_FAILURE, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def g9(x) -> str:
    return f"{x:.9g}"


def _vector(text: str, what: str) -> np.ndarray:
    try:
        return np.array([float(s) for s in text.replace(",", " ").split()], dtype=float)
    except ValueError:
        raise InputError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _need_query(query, path):
    if query is None:
        raise InputError(f"{path}: scene has no query")
    return query


def _write_outputs(args, traj, scene, extra_paths=()):
    if args.out:
        save_trajectory(traj, args.out)
    if getattr(args, "svg", None):
        with open(args.svg, "w") as fh:
            fh.write(render_svg(scene, [traj], paths=extra_paths))


def _summary(label, traj, stats=None):
    print(f"{label}: duration {g9(traj.duration)}")
    if stats is not None:
        print(f"iterations {stats.iterations}  nodes {stats.nodes}  "
              f"collision_checks {stats.collision_checks}  runtime_s {g9(stats.wall_time)}")


def cmd_steer(args) -> int:
    xI = PhaseState(_vector(args.start_q, "--start-q"), _vector(args.start_v, "--start-v")
                    if args.start_v else np.zeros_like(_vector(args.start_q, "--start-q")))
    n = xI.dim
    goal_q = _vector(args.goal_q, "--goal-q")
    xG = PhaseState(goal_q, _vector(args.goal_v, "--goal-v") if args.goal_v else np.zeros(n))
    b = _vector(args.bounds, "--bounds")
    if b.size == 2:
        bounds = np.tile(b, (n, 1))
    elif b.size == 2 * n:
        bounds = b.reshape(n, 2)
    else:
        raise InputError("--bounds: give 'a_min,a_max' or one pair per axis")
    try:
        plan = steer_nd(xI, xG, bounds)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    traj = Trajectory.from_plan(xI, plan)
    if args.json:
        print(dumps_trajectory(traj))
    else:
        print(f"arrival_time {g9(plan.arrival_time)}")
        for i, axis in enumerate(plan.per_axis):
            segs = "  ".join(f"(a={g9(s.accel)}, dt={g9(s.duration)})" for s in axis)
            print(f"axis {i}: {segs}")
    if args.out:
        save_trajectory(traj, args.out)
    return EXIT_OK


def cmd_plan(args) -> int:
    scene, query, _ = load_scene_file(args.scene)
    query = _need_query(query, args.scene)
    pq = PlanQuery(scene, query.start, query.goal, args.max_iterations, args.seed, args.metric)
    if args.method == "bb-rrt":
        r = bb_rrt_bidirectional(pq)
    else:
        r = baseline_rrt_bidirectional(pq)
    if not r.solved:
        print(f"{args.method}: no solution after {r.stats.iterations} iterations", file=sys.stderr)
        return EXIT_FAILURE
    _summary(args.method, r.trajectory, r.stats)
    _write_outputs(args, r.trajectory, scene)
    return EXIT_OK


def _shortcut_config(args) -> ShortcutConfig:
    return ShortcutConfig(
        max_iterations=args.max_iterations,
        stall_window=args.stall_window,
        stall_epsilon=args.stall_epsilon,
        rng_seed=args.seed,
        interval_rule=args.rule,
    )


def cmd_optimize(args) -> int:
    scene, _, _ = load_scene_file(args.scene)
    try:
        traj = load_trajectory(args.trajectory)
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.trajectory}: {exc}") from exc
    if traj.dim != scene.n_dims:
        raise InputError(f"trajectory has {traj.dim} axes, scene has {scene.n_dims}")
    before = traj.duration
    out, trace = optimize_trajectory(scene, traj, _shortcut_config(args))
    print(f"duration {g9(before)} -> {g9(out.duration)}  iterations {trace.iterations}  "
          f"accepted {trace.accepted}  collision_checks {trace.collision_checks}")
    _write_outputs(args, out, scene)
    return EXIT_OK


def cmd_lift(args) -> int:
    scene, query, raw = load_scene_file(args.scene)
    query = _need_query(query, args.scene)
    step = args.step if args.step is not None else raw.get("rrt_step")
    if step is None:
        raise InputError("--step is required when the scene has no rrt_step")
    geo = GeometricConfig(step, args.seed, args.max_iterations)
    r = lift_and_optimize(scene, query.start, query.goal, geo, _shortcut_config(args))
    if not r.solved:
        print("lift: geometric planner found no path", file=sys.stderr)
        return EXIT_FAILURE
    print(f"raw_duration {g9(r.stats.extra['raw_duration'])}  path_vertices {r.stats.extra['path_vertices']}")
    _summary("lift-opt", r.trajectory, r.stats)
    _write_outputs(args, r.trajectory, scene)
    return EXIT_OK


def cmd_bench(args) -> int:
    spec = BenchSpec(
        scene=args.scene,
        method=args.method,
        runs=args.runs,
        base_seed=args.seed,
        max_iterations=args.max_iterations,
        metric=args.metric,
        workers=args.workers,
        timing=not args.no_timing,
    )
    out = args.out if args.out else sys.stdout
    run_bench(spec, out)
    return EXIT_OK


def cmd_render(args) -> int:
    scene, _, _ = load_scene_file(args.scene)
    trajs = []
    for path in args.trajectory or ():
        try:
            trajs.append(load_trajectory(path))
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path}: {exc}") from exc
    svg = render_svg(scene, trajs, mode=args.mode, axis=args.axis, title=args.title or "")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(svg)
    else:
        sys.stdout.write(svg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bangbang", description="Bang-bang kinodynamic planning tools.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        return sp

    s = common(sub.add_parser("steer", help="time-optimal steering between two states"))
    s.add_argument("--start-q", required=True)
    s.add_argument("--start-v", default=None)
    s.add_argument("--goal-q", required=True)
    s.add_argument("--goal-v", default=None)
    s.add_argument("--bounds", default="-1,1", help="'a_min,a_max' or one pair per axis; write --bounds=-1,1")
    s.add_argument("--json", action="store_true", help="print the trajectory as JSON")
    s.add_argument("--out", help="write the trajectory JSON here")
    s.set_defaults(func=cmd_steer)

    s = common(sub.add_parser("plan", help="kinodynamic planning on a scene"))
    s.add_argument("scene", help="scene file or bundled scene name")
    s.add_argument("--method", choices=("bb-rrt", "rrt-bi"), default="bb-rrt")
    s.add_argument("--max-iterations", type=int, default=10_000)
    s.add_argument("--metric", choices=("rho1", "rho2"), default="rho1")
    s.add_argument("--out", help="trajectory JSON output")
    s.add_argument("--svg", help="SVG picture output")
    s.set_defaults(func=cmd_plan)

    def shortcut_opts(sp, default_iters):
        sp.add_argument("--max-iterations", type=int, default=default_iters)
        sp.add_argument("--stall-window", type=int, default=200)
        sp.add_argument("--stall-epsilon", type=float, default=0.1)
        sp.add_argument("--rule", choices=("random", "halton"), default="random")
        sp.add_argument("--out", help="trajectory JSON output")
        sp.add_argument("--svg", help="SVG picture output")

    s = common(sub.add_parser("optimize", help="shortcut a trajectory"))
    s.add_argument("scene")
    s.add_argument("trajectory", help="trajectory JSON")
    shortcut_opts(s, 10_000)
    s.set_defaults(func=cmd_optimize)

    s = common(sub.add_parser("lift", help="geometric path, lift and shortcut"))
    s.add_argument("scene")
    s.add_argument("--step", type=float, default=None, help="geometric step (default: scene rrt_step)")
    shortcut_opts(s, 10_000)
    s.set_defaults(func=cmd_lift)

    s = common(sub.add_parser("bench", help="seeded benchmark batch, CSV output"))
    s.add_argument("scene")
    s.add_argument("--method", choices=METHODS, default="bb-rrt")
    s.add_argument("--runs", type=int, default=10)
    s.add_argument("--max-iterations", type=int, default=10_000)
    s.add_argument("--metric", choices=("rho1", "rho2"), default="rho1")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--no-timing", action="store_true", help="leave runtime_s empty for reproducible CSV")
    s.add_argument("--out", help="CSV file (default stdout)")
    s.set_defaults(func=cmd_bench)

    s = common(sub.add_parser("render", help="SVG of a scene and trajectories"))
    s.add_argument("scene")
    s.add_argument("trajectory", nargs="*")
    s.add_argument("--mode", choices=(WORKSPACE, PHASE), default=WORKSPACE)
    s.add_argument("--axis", type=int, default=0)
    s.add_argument("--title", default=None)
    s.add_argument("--out", help="SVG file (default stdout)")
    s.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, SceneError, InvalidQuery, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
