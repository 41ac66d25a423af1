"""Piecewise-constant-acceleration trajectories in n dimensions.

A trajectory is an initial state plus, for each axis, a list of
``(accel, duration)`` segments.  Switch times differ between axes, so
segments are kept per axis.  Each segment also remembers the state at
which it starts; splicing reuses those stored states instead of
re-integrating, so a replacement in the middle never disturbs the end state.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .steering import ControlSegment, PhaseState, SteeringPlan

# endpoint tolerance for splicing
SPLICE_TOL = 1e-9


class OutOfRangeError(ValueError):
    pass


class ContractViolation(ValueError):
    pass


def _integrate_axis(q0: float, v0: float, control) -> np.ndarray:
    rows = np.empty((len(control), 4))
    q, v = q0, v0
    for k, (a, dt) in enumerate(control):
        rows[k] = (q, v, a, dt)
        q = q + v * dt + 0.5 * a * dt * dt
        v = v + a * dt
    return rows


class Trajectory:
    """Closed-form trajectory ``x(t)`` for ``0 <= t <= duration``.

    ``controls[i]`` is the tuple of ``ControlSegment`` for axis ``i``.
    Instances are immutable.
    """

    __slots__ = ("x0", "controls", "duration", "_rows", "_start", "_q", "_v", "_a")

    def __init__(self, x0, controls: Sequence[Sequence], duration: float | None = None):
        if not isinstance(x0, PhaseState):
            x0 = PhaseState(*x0)
        if len(controls) != x0.dim:
            raise ValueError(f"expected {x0.dim} axis controls, got {len(controls)}")
        rows = [
            _integrate_axis(float(x0.q[i]), float(x0.q_dot[i]), _clean(axis))
            for i, axis in enumerate(controls)
        ]
        self._setup(x0, rows, duration)

    @classmethod
    def _from_rows(cls, x0: PhaseState, rows: list, duration: float) -> "Trajectory":
        obj = cls.__new__(cls)
        obj._setup(x0, rows, duration)
        return obj

    @classmethod
    def from_plan(cls, x0, plan: SteeringPlan) -> "Trajectory":
        if not isinstance(x0, PhaseState):
            x0 = PhaseState(*x0)
        return cls(x0, plan.per_axis, plan.arrival_time)

    @classmethod
    def stationary(cls, x0) -> "Trajectory":
        if not isinstance(x0, PhaseState):
            x0 = PhaseState(*x0)
        return cls(x0, [()] * x0.dim, 0.0)

    def _setup(self, x0: PhaseState, rows: list, duration: float | None):
        totals = [float(r[:, 3].sum()) for r in rows]
        if duration is None:
            duration = max(totals, default=0.0)
        duration = float(duration)
        tol = SPLICE_TOL * max(1.0, duration)
        for i, (r, tot) in enumerate(zip(rows, totals)):
            if np.any(r[:, 3] < 0):
                raise ValueError(f"axis {i} has a negative segment duration")
            if len(r) and abs(tot - duration) > tol:
                raise ValueError(f"axis {i} lasts {tot!r}, trajectory lasts {duration!r}")
            if not len(r) and duration > tol:
                raise ValueError(f"axis {i} has no segments but duration is {duration!r}")
        self.x0 = x0
        self.duration = duration
        self._rows = tuple(rows)
        self.controls = tuple(
            tuple(ControlSegment(float(a), float(dt)) for a, dt in r[:, 2:4]) for r in rows
        )
        n = x0.dim
        K = max((len(r) for r in rows), default=0)
        K = max(K, 1)
        start = np.full((n, K), np.inf)
        q = np.zeros((n, K))
        v = np.zeros((n, K))
        a = np.zeros((n, K))
        for i, r in enumerate(rows):
            if len(r) == 0:
                start[i, 0] = 0.0
                q[i, 0] = x0.q[i]
                v[i, 0] = x0.q_dot[i]
                continue
            k = len(r)
            start[i, :k] = np.concatenate([[0.0], np.cumsum(r[:-1, 3])])
            q[i, :k] = r[:, 0]
            v[i, :k] = r[:, 1]
            a[i, :k] = r[:, 2]
        self._start, self._q, self._v, self._a = start, q, v, a

    @property
    def dim(self) -> int:
        return self.x0.dim

    @property
    def end_state(self) -> PhaseState:
        return self.evaluate(self.duration)

    def segment_count(self) -> int:
        return sum(len(c) for c in self.controls)

    def evaluate(self, t: float) -> PhaseState:
        """State at time ``t``."""
        if not (0.0 <= t <= self.duration):
            raise OutOfRangeError(f"t={t!r} outside [0, {self.duration!r}]")
        if t == 0.0:
            return self.x0
        Q, V = self.sample(np.array([t], dtype=float))
        return PhaseState(Q[0], V[0])

    def sample(self, ts) -> tuple[np.ndarray, np.ndarray]:
        """Positions and velocities at many times; arrays of shape ``(m, n)``.

        No range check: times past the end extrapolate the last segment.
        """
        ts = np.asarray(ts, dtype=float).reshape(-1)
        n, K = self._start.shape
        if n * K * ts.shape[0] <= 4_000_000:
            idx = (self._start[:, :, None] <= ts[None, None, :]).sum(axis=1) - 1
        else:
            idx = np.stack([np.searchsorted(s, ts, side="right") - 1 for s in self._start])
        idx = np.maximum(idx, 0)
        rows = np.arange(n)[:, None]
        tau = ts[None, :] - self._start[rows, idx]
        a = self._a[rows, idx]
        v0 = self._v[rows, idx]
        Q = self._q[rows, idx] + v0 * tau + 0.5 * a * tau * tau
        V = v0 + a * tau
        return Q.T, V.T

    def breakpoints(self) -> np.ndarray:
        """Sorted union of all axes' switch times in ``[0, duration]``."""
        s = self._start[np.isfinite(self._start)]
        s = s[(s > 0.0) & (s < self.duration)]
        return np.unique(np.concatenate([[0.0], s, [self.duration]]))

    def restrict(self, t1: float, t2: float) -> "Trajectory":
        """The piece between ``t1`` and ``t2``, re-timed to start at zero."""
        if not (0.0 <= t1 <= t2 <= self.duration):
            raise OutOfRangeError(f"bad interval [{t1!r}, {t2!r}] for duration {self.duration!r}")
        x1 = self.evaluate(t1)
        if t1 == t2:
            return Trajectory.stationary(x1)
        return Trajectory._from_rows(x1, self._clip_rows(t1, t2, x1), t2 - t1)

    def _clip_rows(self, t1, t2, x1):
        out = []
        for i, r in enumerate(self._rows):
            if len(r) == 0:
                out.append(np.array([[x1.q[i], x1.q_dot[i], 0.0, t2 - t1]]))
                continue
            starts = np.concatenate([[0.0], np.cumsum(r[:-1, 3])])
            ends = starts + r[:, 3]
            ends[-1] = np.inf  # the last segment absorbs rounding in the total
            keep = []
            for k in range(len(r)):
                lo = max(starts[k], t1)
                hi = min(ends[k], t2)
                if hi <= lo:
                    continue
                q, v, a, _ = r[k]
                if lo > starts[k]:
                    if not keep:
                        q, v = x1.q[i], x1.q_dot[i]
                    else:
                        tau = lo - starts[k]
                        q, v = q + v * tau + 0.5 * a * tau * tau, v + a * tau
                elif not keep:
                    q, v = x1.q[i], x1.q_dot[i]
                keep.append((q, v, a, hi - lo))
            if not keep:
                keep = [(x1.q[i], x1.q_dot[i], float(r[-1, 2]), t2 - t1)]
            out.append(np.array(keep, dtype=float))
        return out

    def concat(self, other: "Trajectory", tol: float = SPLICE_TOL) -> "Trajectory":
        """This trajectory followed by ``other``; ``other`` must start where this ends."""
        end = self.end_state
        _check_match(end, other.x0, tol, "concatenation point")
        rows = []
        for r0, r1 in zip(self._rows, other._rows):
            rows.append(np.vstack([r0.reshape(-1, 4), r1.reshape(-1, 4)]))
        return Trajectory._from_rows(self.x0, rows, self.duration + other.duration)

    @classmethod
    def join(cls, pieces: Sequence["Trajectory"], tol: float = SPLICE_TOL) -> "Trajectory":
        """Concatenate many pieces at once; each must start where the previous ends."""
        pieces = [p for p in pieces if p.duration > 0.0] or list(pieces[:1])
        if not pieces:
            raise ValueError("nothing to join")
        for p0, p1 in zip(pieces, pieces[1:]):
            _check_match(p0.end_state, p1.x0, tol, "concatenation point")
        rows = [
            np.vstack([p._rows[i].reshape(-1, 4) for p in pieces]) for i in range(pieces[0].dim)
        ]
        return cls._from_rows(pieces[0].x0, rows, sum(p.duration for p in pieces))

    def splice(self, t1: float, t2: float, mid: "Trajectory", tol: float = SPLICE_TOL) -> "Trajectory":
        """Replace the piece on ``[t1, t2]`` by ``mid``."""
        if not (0.0 <= t1 <= t2 <= self.duration):
            raise OutOfRangeError(f"bad interval [{t1!r}, {t2!r}] for duration {self.duration!r}")
        a = self.evaluate(t1)
        b = self.evaluate(t2)
        _check_match(a, mid.x0, tol, "splice start")
        _check_match(b, mid.end_state, tol, "splice end")
        head = self._clip_rows(0.0, t1, self.x0) if t1 > 0 else [np.empty((0, 4))] * self.dim
        tail = (
            self._clip_rows(t2, self.duration, b)
            if t2 < self.duration
            else [np.empty((0, 4))] * self.dim
        )
        rows = [
            _merge(np.vstack([h, m.reshape(-1, 4), t])) for h, m, t in zip(head, mid._rows, tail)
        ]
        duration = t1 + mid.duration + (self.duration - t2)
        if all(len(r) == 0 for r in rows):
            return Trajectory.stationary(self.x0)
        return Trajectory._from_rows(self.x0, rows, duration)

    def __repr__(self):
        return f"Trajectory(dim={self.dim}, duration={self.duration:.6g}, segments={self.segment_count()})"


def _check_match(x: PhaseState, y: PhaseState, tol: float, what: str):
    err = max(float(np.max(np.abs(x.q - y.q), initial=0.0)), float(np.max(np.abs(x.q_dot - y.q_dot), initial=0.0)))
    scale = max(1.0, float(np.max(np.abs(x.q), initial=0.0)), float(np.max(np.abs(x.q_dot), initial=0.0)))
    if err > tol * scale:
        raise ContractViolation(f"{what} mismatch {err:.3e} exceeds tolerance")


def _merge(rows: np.ndarray) -> np.ndarray:
    """Fuse neighbouring segments with identical acceleration; drop empty ones."""
    if len(rows) < 2:
        return rows
    out = [rows[0].copy()]
    for r in rows[1:]:
        if r[3] == 0.0:
            continue
        if out[-1][3] == 0.0:
            out[-1] = r.copy()
        elif r[2] == out[-1][2]:
            out[-1][3] += r[3]
        else:
            out.append(r.copy())
    return np.array(out)


def _clean(axis):
    out = []
    for seg in axis:
        if isinstance(seg, dict):
            a, dt = seg["a"], seg["dt"]
        else:
            a, dt = seg
        out.append((float(a), float(dt)))
    return out


def evaluate(traj: Trajectory, t: float) -> PhaseState:
    return traj.evaluate(t)


def restrict(traj: Trajectory, t1: float, t2: float) -> Trajectory:
    return traj.restrict(t1, t2)


def splice(traj: Trajectory, t1: float, t2: float, mid: Trajectory) -> Trajectory:
    return traj.splice(t1, t2, mid)
