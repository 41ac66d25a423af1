"""Time-optimal bang-bang steering and planning for double integrators.

Each axis obeys ``q'' = a`` with ``a_min <= a <= a_max``.  The package
provides the exact minimum-time and fixed-time steering solutions, their
synchronisation across axes, piecewise-constant-acceleration trajectories,
planar scenes with collision checking, sampling-based planners that use the
exact steering, and a shortcut optimiser.
"""

from .steering import (
    AccelBounds,
    ControlSegment,
    MinTimeSolution,
    PhaseState,
    PhaseState1,
    SteeringPlan,
    WaitProfile,
    fixed_time_steer_1d,
    min_sync_time,
    min_time_steer_1d,
    parabola_intercept,
    rho1,
    rho2,
    steer_nd,
    wait_profile_1d,
)
from .trajectory import ContractViolation, OutOfRangeError, Trajectory, evaluate, restrict, splice
from .world import (
    CollisionReport,
    PlanarChain,
    PlanarPoint,
    Scene,
    config_free,
    configs_free,
    fk_chain,
    trajectory_free,
)
from .planners import (
    InvalidQuery,
    PlanQuery,
    PlanResult,
    PlanStats,
    baseline_rrt_bidirectional,
    bb_nearest,
    bb_rrt_bidirectional,
    bb_steer_checked,
    rrt_connect_geometric,
)
from .optimize import (
    GeometricConfig,
    OptimizeTrace,
    ShortcutConfig,
    bang_bang_transform,
    lift_and_optimize,
    optimize_trajectory,
    pick_interval,
    shortcut_step,
)
from .io import load_scene, load_scene_file, load_trajectory, save_trajectory
from .bench import BenchSpec, BenchStats, run_bench
from .render import render_svg

__version__ = "0.1.0"
