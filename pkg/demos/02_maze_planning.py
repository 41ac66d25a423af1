"""Planning through a maze with exact steering versus constant-control extensions.

Run: python demos/02_maze_planning.py
"""

import time

from _common import output_dir
from bangbang import PlanQuery, baseline_rrt_bidirectional, bb_rrt_bidirectional, load_scene_file, render_svg

out = output_dir(__doc__)
scene, query, _ = load_scene_file("maze_a")
print(f"maze_a: {len(scene.obstacles)} obstacles, start {query.start.q}, goal {query.goal.q}")

pq = PlanQuery(scene, query.start, query.goal, max_iterations=10_000, rng_seed=0)

# Each extension solves the two-point problem exactly, so both trees grow
# toward samples along time-optimal arcs and can connect exactly.
t0 = time.perf_counter()
bb = bb_rrt_bidirectional(pq, keep_trees=True)
print(f"\nexact-steering RRT: {bb.outcome} in {time.perf_counter() - t0:.3f}s, "
      f"{bb.stats.nodes} nodes, {bb.stats.collision_checks} collision checks, "
      f"trajectory {bb.trajectory.duration:.1f}s")

# The baseline tries 24 fixed accelerations for a fixed time and keeps the
# closest result, then needs the trees to pass within a tolerance.
t0 = time.perf_counter()
base = baseline_rrt_bidirectional(pq, keep_trees=True)
dur = f"{base.trajectory.duration:.1f}s" if base.solved else "none"
print(f"constant-control RRT: {base.outcome} in {time.perf_counter() - t0:.3f}s, "
      f"{base.stats.nodes} nodes, {base.stats.collision_checks} collision checks, trajectory {dur}")

for name, r in (("maze_bb_rrt.svg", bb), ("maze_baseline.svg", base)):
    trajs = [r.trajectory] if r.solved else []
    (out / name).write_text(render_svg(scene, trajs, trees=r.trees, title=name[:-4]))
    print("wrote", out / name)
