"""Builders for the bundled benchmark scenes.

The maze layouts and the manipulator obstacle are reconstructions: the
state space, bounds and robot models follow the experiments, the obstacle
geometry is our own.  Run ``python -m bangbang.corpus`` to regenerate the
JSON files under ``bangbang/scenes``.
"""

from __future__ import annotations

import json
import math
import os

from .io import regular_polygon_query

MAZE_BOUNDS = [[0.0, 800.0], [0.0, 800.0]]
MAZE_VEL = [[-10.0, 10.0], [-10.0, 10.0]]
MAZE_ACCEL = [[-0.25, 0.25], [-0.25, 0.25]]


def _box(x0, y0, x1, y1):
    return [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]


def _maze(name, obstacles, start, goal):
    return {
        "name": name,
        "label": "reconstruction",
        "n_dims": 2,
        "q_bounds": MAZE_BOUNDS,
        "v_bounds": MAZE_VEL,
        "accel_bounds": MAZE_ACCEL,
        "robot": {"type": "point", "radius": 0.0},
        "obstacles": obstacles,
        "resolution": 4.0,
        "rrt_step": 25.0,
        "query": {"start": {"q": start, "v": [0.0, 0.0]}, "goal": {"q": goal, "v": [0.0, 0.0]}},
    }


def maze_a():
    """One block between start and goal, with room to pass on either side."""
    return _maze(
        "maze_a",
        [_box(330, 220, 470, 580), _box(560, 0, 600, 120), _box(200, 680, 240, 800)],
        [100.0, 400.0],
        [700.0, 400.0],
    )


def maze_b():
    """Scattered blocks."""
    return _maze(
        "maze_b",
        [
            _box(150, 100, 250, 450),
            _box(350, 300, 450, 700),
            _box(550, 100, 650, 500),
            _box(0, 600, 250, 650),
            [[500, 600], [700, 650], [600, 760]],
        ],
        [50.0, 50.0],
        [750.0, 750.0],
    )


def maze_c():
    """A corridor with three narrow doors."""
    return _maze(
        "maze_c",
        [
            _box(180, 0, 210, 360), _box(180, 420, 210, 800),
            _box(380, 0, 410, 560), _box(380, 620, 410, 800),
            _box(580, 0, 610, 160), _box(580, 220, 610, 800),
        ],
        [60.0, 400.0],
        [740.0, 400.0],
    )


def manipulator(links: int, perimeter: float = 10.0):
    """Chain folded into a regular polygon on the right of its base; goal on the left.

    A block above the base stops the polygon from swinging over rigidly.
    """
    start = regular_polygon_query(links, -math.pi / 2)
    goal = regular_polygon_query(links, math.pi / 2)
    diameter = perimeter / math.pi
    return {
        "name": f"chain_{links}",
        "label": "reconstruction",
        "n_dims": links,
        "q_bounds": [[-math.pi, math.pi]] * links,
        "v_bounds": [[-10.0, 10.0]] * links,
        "accel_bounds": [[-1.0, 1.0]] * links,
        "robot": {
            "type": "chain",
            "links": links,
            "link_length": perimeter / links,
            "base": [0.0, 0.0],
            "joint_limit": math.pi,
            "self_collision": False,
        },
        "obstacles": [_box(-1.0, 0.75 * diameter, 1.0, 0.75 * diameter + 1.0)],
        "resolution": 0.05,
        "rrt_step": 0.25,
        "query": {
            "start": {"q": start.tolist(), "v": [0.0] * links},
            "goal": {"q": goal.tolist(), "v": [0.0] * links},
        },
    }


def all_scenes():
    out = [maze_a(), maze_b(), maze_c()]
    out += [manipulator(n) for n in (10, 20, 50, 100)]
    return out


def write_all(directory: str) -> list[str]:
    paths = []
    for d in all_scenes():
        path = os.path.join(directory, d["name"] + ".json")
        with open(path, "w") as fh:
            json.dump(d, fh, indent=1)
            fh.write("\n")
        paths.append(path)
    return paths


if __name__ == "__main__":
    here = os.path.join(os.path.dirname(__file__), "scenes")
    for p in write_all(here):
        print(p)
