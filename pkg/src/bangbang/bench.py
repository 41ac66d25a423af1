"""Seeded benchmark batches with CSV output."""

from __future__ import annotations

import csv
import io
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .io import load_scene_file
from .optimize import GeometricConfig, ShortcutConfig, lift_and_optimize, optimize_trajectory
from .planners import (
    FAILURE,
    SOLUTION,
    PlanQuery,
    baseline_rrt_bidirectional,
    bb_rrt_bidirectional,
    rrt_connect_geometric,
)

METHODS = ("bb-rrt", "rrt-bi", "rrt-connect", "bb-opt", "lift-opt")
CSV_HEADER = ("seed", "outcome", "runtime_s", "nodes", "collision_checks", "traj_time")
AGGREGATES = ("mean", "median", "stddev")


@dataclass(frozen=True)
class BenchSpec:
    scene: str
    method: str = "bb-rrt"
    runs: int = 10
    base_seed: int = 0
    max_iterations: int = 10_000
    metric: str = "rho1"
    # constant-control baseline
    action_count: int = 24
    delta_t: float = 5.0
    connect_tol: tuple = (5.0, 2.0)
    velocity_weight: float = 17.32
    batch_actions: bool = False
    # geometric planner step; None uses the scene's "rrt_step"
    rrt_step: float | None = None
    shortcut: ShortcutConfig = field(default_factory=ShortcutConfig)
    workers: int = 1
    # wall-clock timing makes the CSV differ between runs; switch it off for
    # reproducible output
    timing: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {', '.join(METHODS)}")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class BenchRow:
    seed: int
    outcome: str
    runtime_s: float
    nodes: int | None
    collision_checks: int
    traj_time: float | None


@dataclass
class BenchStats:
    rows: list
    timing: bool = True

    @property
    def solved(self) -> int:
        return sum(r.outcome == SOLUTION for r in self.rows)

    def column(self, name: str, solved_only: bool = False) -> list:
        rows = [r for r in self.rows if r.outcome == SOLUTION] if solved_only else self.rows
        return [getattr(r, name) for r in rows if getattr(r, name) is not None]

    def aggregates(self) -> dict:
        """mean, median and stddev of each numeric column.

        ``traj_time`` is aggregated over solved runs only.
        """
        out = {}
        for agg in AGGREGATES:
            out[agg] = {}
            for name in CSV_HEADER[2:]:
                vals = self.column(name, solved_only=(name == "traj_time"))
                out[agg][name] = _aggregate(agg, vals)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            runtime = _fmt(r.runtime_s) if self.timing else ""
            w.writerow([r.seed, r.outcome, runtime, _fmt(r.nodes), r.collision_checks, _fmt(r.traj_time)])
        aggs = self.aggregates()
        rate = f"{self.solved}/{len(self.rows)}"
        for agg in AGGREGATES:
            vals = aggs[agg]
            runtime = _fmt(vals["runtime_s"]) if self.timing else ""
            w.writerow([agg, rate, runtime, _fmt(vals["nodes"]), _fmt(vals["collision_checks"]),
                        _fmt(vals["traj_time"])])
        return buf.getvalue()


def _aggregate(kind: str, vals: list):
    if not vals:
        return None
    if kind == "mean":
        return statistics.fmean(vals)
    if kind == "median":
        return float(statistics.median(vals))
    return statistics.stdev(vals) if len(vals) > 1 else 0.0


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return f"{x:.9g}"


def run_one(spec: BenchSpec, seed: int, scene=None, query=None, raw=None) -> BenchRow:
    """One seeded run of ``spec.method``."""
    if scene is None:
        scene, query, raw = load_scene_file(spec.scene)
    if query is None:
        raise ValueError(f"{spec.scene}: scene has no query")
    m = spec.method
    if m in ("bb-rrt", "rrt-bi", "bb-opt"):
        pq = PlanQuery(scene, query.start, query.goal, spec.max_iterations, seed, spec.metric)
        if m == "rrt-bi":
            r = baseline_rrt_bidirectional(
                pq, spec.action_count, spec.delta_t, spec.connect_tol, spec.velocity_weight,
                batch_actions=spec.batch_actions,
            )
        else:
            r = bb_rrt_bidirectional(pq)
        if m == "bb-opt":
            if not r.solved:
                return BenchRow(seed, FAILURE, r.stats.wall_time, None, r.stats.collision_checks, None)
            cfg = _seeded(spec.shortcut, seed)
            traj, trace = optimize_trajectory(scene, r.trajectory, cfg)
            return BenchRow(seed, SOLUTION, trace.wall_time, None, trace.collision_checks, traj.duration)
        dur = r.trajectory.duration if r.solved else None
        return BenchRow(seed, r.outcome, r.stats.wall_time, r.stats.nodes, r.stats.collision_checks, dur)
    step = spec.rrt_step if spec.rrt_step is not None else (raw or {}).get("rrt_step")
    if step is None:
        raise ValueError("rrt_step is needed for geometric planning")
    if m == "rrt-connect":
        g = rrt_connect_geometric(scene, query.start.q, query.goal.q, step, seed, spec.max_iterations)
        outcome = SOLUTION if g.path is not None else FAILURE
        return BenchRow(seed, outcome, g.stats.wall_time, g.stats.nodes, g.stats.collision_checks, None)
    geo = GeometricConfig(step, seed, spec.max_iterations)
    r = lift_and_optimize(scene, query.start, query.goal, geo, _seeded(spec.shortcut, seed))
    dur = r.trajectory.duration if r.solved else None
    return BenchRow(seed, r.outcome, r.stats.wall_time, r.stats.nodes, r.stats.collision_checks, dur)


def _seeded(cfg: ShortcutConfig, seed: int) -> ShortcutConfig:
    return ShortcutConfig(cfg.max_iterations, cfg.stall_window, cfg.stall_epsilon, seed,
                          cfg.collision_resolution, cfg.interval_rule)


def run_bench(spec: BenchSpec, out=None) -> BenchStats:
    """Run seeds ``base_seed .. base_seed + runs - 1``; rows stay in seed order.

    Writes the CSV to ``out`` (a path or a text stream) when given.
    """
    scene, query, raw = load_scene_file(spec.scene)
    seeds = range(spec.base_seed, spec.base_seed + spec.runs)

    def job(seed):
        return run_one(spec, seed, scene, query, raw)

    if spec.workers > 1:
        with ThreadPoolExecutor(spec.workers) as pool:
            rows = list(pool.map(job, seeds))
    else:
        rows = [job(s) for s in seeds]
    stats = BenchStats(rows, spec.timing)
    if out is not None:
        text = stats.to_csv()
        if isinstance(out, str):
            with open(out, "w") as fh:
                fh.write(text)
        else:
            out.write(text)
    return stats
