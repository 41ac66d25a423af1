"""Exact minimum-time steering for one axis and its synchronisation across axes.

Run: python demos/01_steering.py
"""

from _common import output_dir
from bangbang import (
    PhaseState,
    Scene,
    Trajectory,
    fixed_time_steer_1d,
    min_sync_time,
    min_time_steer_1d,
    render_svg,
    steer_nd,
    wait_profile_1d,
)

out = output_dir(__doc__)
bounds = (-1.0, 1.0)

# Rest to rest over one unit: accelerate for one second, brake for one.
s = min_time_steer_1d((0.0, 0.0), (1.0, 0.0), bounds)
print("rest to rest, 1 unit:", s.t_star, "s with", s.control)

# Arriving while moving can take two bangs in the other order.
s = min_time_steer_1d((0.0, 2.0), (0.0, 0.0), bounds)
print("overshoot and return:", round(s.t_star, 6), "s with", s.control)

# Some pairs admit a fast solution and a slow one, with a band of arrival
# times in between that no bounded control can hit.
xI, xG = (0.0, 2.0), (1.0, 2.0)
w = wait_profile_1d(xI, xG, bounds)
print(f"\nfrom {xI} to {xG}: t* = {w.t_star:.4f}, unreachable times {w.gap}")
lo, hi = w.gap
for T in (w.t_star, 0.5 * (w.t_star + lo), lo, 0.5 * (lo + hi), hi, hi + 1.0):
    c = fixed_time_steer_1d(xI, xG, bounds, T)
    label = "unreachable" if c is None else " then ".join(f"{s.accel:+.3f} for {s.duration:.3f}s" for s in c)
    print(f"  arrive at {T:7.4f}s: {label}")

# With several axes the plan must arrive on every axis at once.  Here axis
# 1 needs 3.46s, which falls inside axis 0's unreachable band, so both axes
# wait until that band closes.
xI = PhaseState([0.0, 0.0], [2.0, 0.0])
xG = PhaseState([1.0, 3.0], [2.0, 0.0])
profiles = [wait_profile_1d((xI.q[i], xI.q_dot[i]), (xG.q[i], xG.q_dot[i]), bounds) for i in range(2)]
for i, p in enumerate(profiles):
    print(f"axis {i}: t* {p.t_star:.4f}  gap {p.gap}")
print("common arrival:", round(min_sync_time(profiles), 6))
plan = steer_nd(xI, xG, bounds)
traj = Trajectory.from_plan(xI, plan)
print("end state:", traj.end_state)

# Phase portrait of axis 0: two parabolic arcs meeting at the switch point.
scene = Scene([(-10, 10)] * 2, [(-5, 5)] * 2, [bounds] * 2)
path = out / "steering_phase.svg"
path.write_text(render_svg(scene, [traj], mode="phase", axis=0, title="axis 0 phase plane"))
print("wrote", path)
