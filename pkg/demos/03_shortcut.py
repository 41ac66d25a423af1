"""Shortening a planner's trajectory by splicing in exact steering shortcuts.

Run: python demos/03_shortcut.py
"""

import numpy as np

from _common import output_dir
from bangbang import PlanQuery, ShortcutConfig, bb_rrt_bidirectional, load_scene_file, optimize_trajectory, render_svg

out = output_dir(__doc__)
scene, query, _ = load_scene_file("maze_a")
r = bb_rrt_bidirectional(PlanQuery(scene, query.start, query.goal, rng_seed=4))
raw = r.trajectory
print(f"planner trajectory: {raw.duration:.2f}s")

# Pick a random window, steer its endpoints directly, keep it if it is
# collision free and faster; stop once 200 attempts gain less than 0.1s.
opt, trace = optimize_trajectory(scene, raw, ShortcutConfig(rng_seed=4))
d = trace.durations()
print(f"after {trace.iterations} attempts ({trace.accepted} accepted): {opt.duration:.2f}s, "
      f"{1 - opt.duration / raw.duration:.0%} shorter")
for k in (0, 10, 50, 100, 200, 500, len(d) - 1):
    if k < len(d):
        print(f"  attempt {k:5d}: {d[k]:.2f}s")
assert np.all(np.diff(d) <= 0)

path = out / "maze_shortcut.svg"
path.write_text(render_svg(scene, [raw, opt], title="before (blue) and after (purple)"))
print("wrote", path)
