"""Static SVG pictures of scenes, trees, paths and phase portraits."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .trajectory import Trajectory
from .world import PlanarChain, Scene, fk_chain

WORKSPACE = "workspace"
PHASE = "phase"

_COLORS = ("#2a7ab0", "#8e44ad", "#27ae60", "#d35400", "#c0392b")


class _Canvas:
    """Maps world coordinates into an SVG box with y pointing up."""

    def __init__(self, lo, hi, width: float, margin: float = 10.0):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        span = np.where(hi - lo > 0, hi - lo, 1.0)
        self.lo, self.span = lo, span
        self.scale = (width - 2 * margin) / span[0]
        self.margin = margin
        self.width = width
        self.height = span[1] * self.scale + 2 * margin
        self.items: list[str] = []

    def xy(self, P) -> np.ndarray:
        P = np.atleast_2d(np.asarray(P, dtype=float))
        x = self.margin + (P[:, 0] - self.lo[0]) * self.scale
        y = self.margin + (self.lo[1] + self.span[1] - P[:, 1]) * self.scale
        return np.stack([x, y], axis=1)

    def polyline(self, P, color, width=1.0, opacity=1.0):
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in self.xy(P))
        self.items.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="{width}" stroke-opacity="{opacity}"/>'
        )

    def polygon(self, P, fill="#555555"):
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in self.xy(P))
        self.items.append(f'<polygon points="{pts}" fill="{fill}" stroke="#222222"/>')

    def circle(self, p, r, color):
        (x, y), = self.xy(p)
        self.items.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="{color}"/>')

    def text(self, s):
        self.items.append(f'<text x="{self.margin}" y="{self.margin + 12}" font-size="12">{escape(s)}</text>')

    def document(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width:.0f}" '
            f'height="{self.height:.0f}" viewBox="0 0 {self.width:.2f} {self.height:.2f}">'
        )
        bg = f'<rect width="{self.width:.2f}" height="{self.height:.2f}" fill="white"/>'
        return "\n".join([head, bg, *self.items, "</svg>"]) + "\n"


def _traj_points(traj: Trajectory, count: int = 200) -> tuple[np.ndarray, np.ndarray]:
    if traj.duration == 0.0:
        return traj.x0.q[None, :], traj.x0.q_dot[None, :]
    ts = np.unique(np.concatenate([np.linspace(0.0, traj.duration, count), traj.breakpoints()]))
    return traj.sample(ts)


def _tree_segments(tree) -> list:
    """Polylines for the edges of a planner tree."""
    out = []
    if hasattr(tree, "edge"):
        for e in tree.edge:
            if e is None:
                continue
            traj, lo, hi = e
            ts = np.linspace(lo, hi, 12)
            Q, _ = traj.sample(ts)
            out.append(Q)
    elif hasattr(tree, "pts"):
        for k, p in enumerate(tree.parent):
            if p >= 0:
                out.append(np.array([tree.pts[p], tree.pts[k]]))
    else:
        # constant-control tree: straight chords between nodes
        for k, p in enumerate(tree.parent):
            if p >= 0:
                out.append(np.array([tree.Q[p], tree.Q[k]]))
    return out


def render_svg(scene: Scene, trajectories=(), trees=(), paths=(), mode: str = WORKSPACE,
               axis: int = 0, width: float = 600.0, title: str = "") -> str:
    """SVG document for the scene plus any trajectories, trees and paths.

    ``workspace`` mode draws obstacles and motion in the plane; for a chain
    robot it draws arm snapshots along each trajectory or path.  ``phase``
    mode plots ``(q, q_dot)`` of one axis with switch points marked.
    """
    if mode == PHASE:
        return _render_phase(scene, trajectories, axis, width, title)
    if mode != WORKSPACE:
        raise ValueError(f"unknown render mode {mode!r}")
    robot = scene.robot
    chain = isinstance(robot, PlanarChain)
    if chain:
        reach = robot.links * robot.link_length
        base = np.asarray(robot.base, dtype=float)
        lo, hi = base - reach, base + reach
    else:
        lo, hi = scene.q_bounds[:2, 0], scene.q_bounds[:2, 1]
    c = _Canvas(lo, hi, width)
    c.polyline(np.array([lo, [hi[0], lo[1]], hi, [lo[0], hi[1]], lo]), "#999999")
    for poly in scene.obstacles:
        c.polygon(poly)
    if not chain:
        for t, tree in enumerate(trees):
            for seg in _tree_segments(tree):
                c.polyline(seg[:, :2], _COLORS[(t + 3) % len(_COLORS)], 0.6, 0.6)
    for k, path in enumerate(paths):
        P = np.atleast_2d(np.asarray(path, dtype=float))
        if chain:
            _arm_snapshots(c, robot, P, "#27ae60")
        else:
            c.polyline(P[:, :2], "#27ae60", 1.5)
    for k, traj in enumerate(trajectories):
        color = _COLORS[k % len(_COLORS)]
        Q, _ = _traj_points(traj)
        if chain:
            idx = np.linspace(0, len(Q) - 1, min(len(Q), 12)).astype(int)
            _arm_snapshots(c, robot, Q[idx], color)
        else:
            c.polyline(Q[:, :2], color, 2.0)
            c.circle(Q[0, :2], 3, color)
            c.circle(Q[-1, :2], 3, color)
    if title:
        c.text(title)
    return c.document()


def _arm_snapshots(c: _Canvas, robot: PlanarChain, Q: np.ndarray, color: str):
    for j, q in enumerate(Q):
        seg = fk_chain(robot, q)
        pts = np.vstack([seg[:, 0], seg[-1:, 1]])
        opacity = 0.3 + 0.7 * (j == 0 or j == len(Q) - 1)
        c.polyline(pts, color, 1.2, opacity)


def _render_phase(scene: Scene, trajectories, axis: int, width: float, title: str) -> str:
    if not 0 <= axis < scene.n_dims:
        raise ValueError(f"axis {axis} out of range for {scene.n_dims} axes")
    lo = np.array([scene.q_bounds[axis, 0], scene.v_bounds[axis, 0]])
    hi = np.array([scene.q_bounds[axis, 1], scene.v_bounds[axis, 1]])
    for traj in trajectories:
        Q, V = _traj_points(traj)
        lo = np.minimum(lo, [Q[:, axis].min(), V[:, axis].min()])
        hi = np.maximum(hi, [Q[:, axis].max(), V[:, axis].max()])
    c = _Canvas(lo, hi, width)
    # the zero-velocity line
    c.polyline(np.array([[lo[0], 0.0], [hi[0], 0.0]]), "#bbbbbb")
    for k, traj in enumerate(trajectories):
        color = _COLORS[k % len(_COLORS)]
        Q, V = _traj_points(traj)
        c.polyline(np.stack([Q[:, axis], V[:, axis]], axis=1), color, 2.0)
        bp = np.cumsum([seg.duration for seg in traj.controls[axis]])[:-1]
        bp = bp[(bp > 0.0) & (bp < traj.duration)]
        if len(bp):
            Qs, Vs = traj.sample(bp)
            for p in np.stack([Qs[:, axis], Vs[:, axis]], axis=1):
                c.circle(p, 4, "#c0392b")
        c.circle([traj.x0.q[axis], traj.x0.q_dot[axis]], 3, color)
    if title:
        c.text(title)
    return c.document()
