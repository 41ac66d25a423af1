"""A 10-link planar arm: geometric path, rest-to-rest lift, then shortcutting.

Run: python demos/04_manipulator.py
"""

from _common import output_dir
from bangbang import GeometricConfig, ShortcutConfig, lift_and_optimize, load_scene_file, render_svg

out = output_dir(__doc__)
scene, query, raw = load_scene_file("chain_10")
print(f"chain_10: {scene.n_dims} joints, {len(scene.obstacles)} obstacle(s)")

# A geometric planner finds a joint-space polyline; each edge is then
# driven rest to rest in minimum time along the line, which is always
# collision free because it never leaves the path.  Shortcutting then
# removes the stops.
r = lift_and_optimize(scene, query.start, query.goal, GeometricConfig(raw["rrt_step"], 0),
                      ShortcutConfig(rng_seed=0))
x = r.stats.extra
print(f"path with {x['path_vertices']} vertices lifted to {x['raw_duration']:.2f}s, "
      f"shortcut to {r.trajectory.duration:.2f}s ({x['raw_duration'] / r.trajectory.duration:.1f}x) "
      f"in {r.stats.wall_time:.2f}s")

path = out / "chain_10.svg"
path.write_text(render_svg(scene, [r.trajectory], title="chain_10 snapshots"))
print("wrote", path)
