"""JSON formats for scenes and trajectories.

Scene file::

    {
      "name": "maze_a",
      "n_dims": 2,
      "q_bounds": [[0, 800], [0, 800]],
      "v_bounds": [[-10, 10], [-10, 10]],
      "accel_bounds": [[-1, 1], [-1, 1]],
      "robot": {"type": "point", "radius": 0.0},
      "obstacles": [[[x, y], ...], ...],
      "resolution": 4.0,                        # optional
      "query": {"start": {"q": [...], "v": [...]},
                "goal":  {"q": [...], "v": [...]}},   # optional
      "rrt_step": 25.0                          # optional
    }

``robot`` is either ``{"type": "point", "radius": r}`` or
``{"type": "chain", "links": n, "link_length": l, "base": [x, y],
"joint_limit": pi, "self_collision": false}``.

Trajectory file::

    {"x0": {"q": [...], "v": [...]},
     "axes": [[{"a": ..., "dt": ...}, ...], ...],
     "duration": ...}
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .steering import PhaseState
from .trajectory import Trajectory
from .world import PlanarChain, PlanarPoint, Scene


class SceneError(ValueError):
    pass


@dataclass(frozen=True)
class SceneQuery:
    start: PhaseState
    goal: PhaseState


def _field(d: dict, key: str, where: str):
    if key not in d:
        raise SceneError(f"{where}: missing field {key!r}")
    return d[key]


def _state(d, where) -> PhaseState:
    try:
        q = _field(d, "q", where)
        v = d.get("v", [0.0] * len(q))
        return PhaseState(q, v)
    except (TypeError, ValueError) as exc:
        raise SceneError(f"{where}: {exc}") from exc


def _robot(d: dict):
    kind = _field(d, "type", "robot")
    if kind == "point":
        return PlanarPoint(float(d.get("radius", 0.0)))
    if kind == "chain":
        return PlanarChain(
            links=int(_field(d, "links", "robot")),
            link_length=float(_field(d, "link_length", "robot")),
            base=tuple(d.get("base", (0.0, 0.0))),
            joint_limit=float(d.get("joint_limit", math.pi)),
            self_collision=bool(d.get("self_collision", False)),
        )
    raise SceneError(f"robot.type: unknown robot type {kind!r}")


def scene_from_dict(d: dict) -> Scene:
    try:
        n = int(_field(d, "n_dims", "scene"))
        robot = _robot(_field(d, "robot", "scene"))
        scene = Scene(
            q_bounds=_field(d, "q_bounds", "scene"),
            v_bounds=_field(d, "v_bounds", "scene"),
            accel=_field(d, "accel_bounds", "scene"),
            obstacles=tuple(d.get("obstacles", ())),
            robot=robot,
            resolution=d.get("resolution"),
            name=d.get("name", ""),
        )
    except SceneError:
        raise
    except (TypeError, ValueError) as exc:
        raise SceneError(str(exc)) from exc
    if scene.n_dims != n:
        raise SceneError(f"n_dims: declared {n}, bounds describe {scene.n_dims} axes")
    return scene


def query_from_dict(d: dict) -> SceneQuery | None:
    q = d.get("query")
    if q is None:
        return None
    return SceneQuery(_state(_field(q, "start", "query"), "query.start"),
                      _state(_field(q, "goal", "query"), "query.goal"))


def _read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SceneError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def resolve_scene_path(path_or_name: str) -> str:
    """A file path, or the name of a bundled scene such as ``"maze_a"``."""
    if os.path.exists(path_or_name):
        return path_or_name
    name = path_or_name if path_or_name.endswith(".json") else path_or_name + ".json"
    bundled = resources.files("bangbang") / "scenes" / name
    if bundled.is_file():
        return str(bundled)
    raise FileNotFoundError(f"no scene file or bundled scene named {path_or_name!r}")


def load_scene(path: str) -> Scene:
    path = resolve_scene_path(path)
    d = _read_json(path)
    try:
        return scene_from_dict(d)
    except SceneError as exc:
        raise SceneError(f"{path}: {exc}") from exc


def load_scene_file(path: str) -> tuple[Scene, SceneQuery | None, dict]:
    """Scene, optional bundled query, and the raw dict (for extra settings)."""
    path = resolve_scene_path(path)
    d = _read_json(path)
    try:
        return scene_from_dict(d), query_from_dict(d), d
    except SceneError as exc:
        raise SceneError(f"{path}: {exc}") from exc


def scene_to_dict(scene: Scene, query: SceneQuery | None = None, **extra) -> dict:
    robot = scene.robot
    if isinstance(robot, PlanarPoint):
        rd = {"type": "point", "radius": robot.radius}
    else:
        rd = {
            "type": "chain",
            "links": robot.links,
            "link_length": robot.link_length,
            "base": list(robot.base),
            "joint_limit": robot.joint_limit,
            "self_collision": robot.self_collision,
        }
    d = {
        "name": scene.name,
        "n_dims": scene.n_dims,
        "q_bounds": scene.q_bounds.tolist(),
        "v_bounds": scene.v_bounds.tolist(),
        "accel_bounds": scene.accel.tolist(),
        "robot": rd,
        "obstacles": [p.tolist() for p in scene.obstacles],
        "resolution": scene.resolution,
    }
    if query is not None:
        d["query"] = {
            "start": {"q": query.start.q.tolist(), "v": query.start.q_dot.tolist()},
            "goal": {"q": query.goal.q.tolist(), "v": query.goal.q_dot.tolist()},
        }
    d.update(extra)
    return d


def trajectory_to_dict(traj: Trajectory) -> dict:
    return {
        "x0": {"q": traj.x0.q.tolist(), "v": traj.x0.q_dot.tolist()},
        "axes": [[{"a": s.accel, "dt": s.duration} for s in axis] for axis in traj.controls],
        "duration": traj.duration,
    }


def trajectory_from_dict(d: dict) -> Trajectory:
    x0 = PhaseState(d["x0"]["q"], d["x0"]["v"])
    axes = [[(seg["a"], seg["dt"]) for seg in axis] for axis in d["axes"]]
    return Trajectory(x0, axes, d.get("duration"))


def dumps_trajectory(traj: Trajectory) -> str:
    return json.dumps(trajectory_to_dict(traj), indent=1)


def save_trajectory(traj: Trajectory, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_trajectory(traj))
        fh.write("\n")


def load_trajectory(path: str) -> Trajectory:
    with open(path) as fh:
        return trajectory_from_dict(json.load(fh))


def regular_polygon_query(links: int, heading: float) -> np.ndarray:
    """Joint angles that fold the chain into a regular polygon.

    The first link points along ``heading``; every joint turns by the
    exterior angle ``2 pi / links``.
    """
    q = np.full(links, 2.0 * math.pi / links)
    q[0] = heading
    return q
