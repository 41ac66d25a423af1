"""Time-optimal steering for independent double integrators.

One axis obeys ``q'' = a`` with ``a_min <= a <= a_max`` and ``a_min < 0 < a_max``.
Between any two phase states the minimum-time control has at most two
constant segments at extremal accelerations.  Constant-acceleration motion
traces parabolas in the ``(q, q')`` phase plane, so the switching point is
the intersection of a parabola through the start with one through the goal.

For a vector of axes the arrival times must be synchronised.  An axis can
reach its goal at any time ``t >= t*`` except possibly inside one open gap
interval ``(t_limit, t_mirror)``; the common arrival time is found with a
line sweep over the sorted event times.

All functions are pure.  The vectorised helpers operate on whole arrays of
axes at once, which is what the planners call in their inner loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

# |q'_switch| below this is zero
SWITCH_VELOCITY_EPS = 1e-12
# arrival times this close to a gap endpoint count as the (feasible) endpoint
BOUNDARY_EPS = 1e-9


class AccelBounds(NamedTuple):
    a_min: float
    a_max: float

    def check(self) -> "AccelBounds":
        if not (self.a_min < 0.0 < self.a_max):
            raise ValueError(
                f"acceleration bounds must straddle zero, got [{self.a_min}, {self.a_max}]"
            )
        return self


class PhaseState1(NamedTuple):
    q: float
    q_dot: float


class ControlSegment(NamedTuple):
    accel: float
    duration: float


PiecewiseControl1 = tuple  # tuple[ControlSegment, ...]


class MinTimeSolution(NamedTuple):
    control: tuple
    t_star: float
    switch: PhaseState1


@dataclass(frozen=True)
class WaitProfile:
    """Feasible arrival times of one axis.

    ``t`` is reachable iff ``t >= t_star`` and ``t`` is not strictly inside
    ``gap``.
    """

    t_star: float
    gap: tuple[float, float] | None = None

    def __post_init__(self):
        if self.gap is not None:
            lo, hi = self.gap
            if not (self.t_star <= lo < hi):
                raise ValueError(f"bad gap {self.gap} for t_star={self.t_star}")

    def feasible(self, t: float, eps: float = 0.0) -> bool:
        if t < self.t_star - eps:
            return False
        if self.gap is not None:
            lo, hi = self.gap
            if lo + eps < t < hi - eps:
                return False
        return True


@dataclass(frozen=True)
class PhaseState:
    """An n-dimensional state ``x = (q, q_dot)``."""

    q: np.ndarray
    q_dot: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(-1)
        v = np.array(self.q_dot, dtype=float).reshape(-1)
        if q.shape != v.shape:
            raise ValueError(f"position/velocity dimension mismatch: {q.shape} vs {v.shape}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(v))):
            raise ValueError("phase state must be finite")
        q.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "q_dot", v)

    @property
    def dim(self) -> int:
        return self.q.shape[0]

    @classmethod
    def at_rest(cls, q) -> "PhaseState":
        q = np.asarray(q, dtype=float)
        return cls(q, np.zeros_like(q))

    def axis(self, i: int) -> PhaseState1:
        return PhaseState1(float(self.q[i]), float(self.q_dot[i]))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.q_dot])

    def allclose(self, other: "PhaseState", atol: float = 1e-9) -> bool:
        return bool(
            np.allclose(self.q, other.q, rtol=0.0, atol=atol)
            and np.allclose(self.q_dot, other.q_dot, rtol=0.0, atol=atol)
        )

    def __eq__(self, other):
        if not isinstance(other, PhaseState):
            return NotImplemented
        return bool(np.array_equal(self.q, other.q) and np.array_equal(self.q_dot, other.q_dot))

    def __hash__(self):
        return hash((self.q.tobytes(), self.q_dot.tobytes()))

    def __repr__(self):
        return f"PhaseState(q={self.q.tolist()}, q_dot={self.q_dot.tolist()})"


@dataclass(frozen=True)
class SteeringPlan:
    """Synchronised per-axis controls that all finish at ``arrival_time``."""

    per_axis: tuple
    arrival_time: float

    @property
    def dim(self) -> int:
        return len(self.per_axis)


def as_bounds(bounds, n: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Normalise bounds to ``(a_min, a_max)`` arrays.

    Accepts a sequence of ``AccelBounds``/pairs, an ``(n, 2)`` array, or a
    single pair broadcast to ``n`` axes.
    """
    arr = np.asarray(bounds, dtype=float)
    if arr.ndim == 1:
        if arr.shape[0] != 2:
            raise ValueError(f"cannot interpret bounds of shape {arr.shape}")
        arr = np.tile(arr, (n if n is not None else 1, 1))
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"cannot interpret bounds of shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"expected bounds for {n} axes, got {arr.shape[0]}")
    a_min, a_max = arr[:, 0], arr[:, 1]
    if not (np.all(a_min < 0.0) and np.all(a_max > 0.0)):
        raise ValueError("acceleration bounds must satisfy a_min < 0 < a_max on every axis")
    return a_min, a_max


def parabola_intercept(x: PhaseState1, accel: float) -> float:
    """Position where the constant-``accel`` parabola through ``x`` meets ``q' = 0``."""
    if accel == 0.0:
        raise ValueError("parabola intercept undefined for zero acceleration")
    q, v = x
    return q - v * v / (2.0 * accel)


# ---------------------------------------------------------------------------
# vectorised kernels


class _Profiles(NamedTuple):
    t_star: np.ndarray
    a1: np.ndarray
    t1: np.ndarray
    a2: np.ndarray
    t2: np.ndarray
    v_switch: np.ndarray
    has_gap: np.ndarray
    t_limit: np.ndarray
    t_mirror: np.ndarray


def _candidates(qI, vI, qG, vG, a_min, a_max):
    """All four (type, root) switching candidates, shape ``(4, n)``.

    Rows: accel-first upper root, accel-first lower root, brake-first upper
    root, brake-first lower root.
    """
    A = a_max
    D = -a_min
    dq = qG - qI
    inv = 1.0 / A + 1.0 / D
    vI2 = vI * vI
    vG2 = vG * vG
    s_acc = (2.0 * dq + vI2 / A + vG2 / D) / inv
    s_brk = (vI2 / D + vG2 / A - 2.0 * dq) / inv

    # rounding tolerance on squared switching speed
    scale = vI2 + vG2 + np.abs(dq) * (A + D)
    tol_s = 1e-13 * scale
    ok_acc = s_acc >= -tol_s
    ok_brk = s_brk >= -tol_s
    r_acc = np.sqrt(np.maximum(s_acc, 0.0))
    r_brk = np.sqrt(np.maximum(s_brk, 0.0))

    a1 = np.stack([A, A, -D, -D])
    a2 = np.stack([-D, -D, A, A])
    vs = np.stack([r_acc, -r_acc, r_brk, -r_brk])
    ok = np.stack([ok_acc, ok_acc, ok_brk, ok_brk])

    dv1 = vs - vI
    dv2 = vG - vs
    tol_v = 1e-12 * (np.abs(vI) + np.abs(vG) + np.maximum(r_acc, r_brk))
    # the sign of each velocity change must agree with its acceleration
    ok &= (dv1 * np.sign(a1) >= -tol_v) & (dv2 * np.sign(a2) >= -tol_v)
    t1 = np.maximum(dv1 / a1, 0.0)
    t2 = np.maximum(dv2 / a2, 0.0)
    return a1, a2, vs, t1, t2, ok, r_acc, r_brk


def _profiles(qI, vI, qG, vG, a_min, a_max) -> _Profiles:
    qI, vI, qG, vG, a_min, a_max = np.broadcast_arrays(
        *(np.atleast_1d(np.asarray(v, dtype=float)) for v in (qI, vI, qG, vG, a_min, a_max))
    )
    with np.errstate(invalid="ignore", divide="ignore"):
        a1, a2, vs, t1, t2, ok, r_acc, r_brk = _candidates(qI, vI, qG, vG, a_min, a_max)
        total = np.where(ok, t1 + t2, np.inf)
        bad = ~ok.any(axis=0)
        if np.any(bad):
            # rounding pushed every candidate out; take the least-violating one
            total = np.where(bad[None], t1 + t2, total)
        best = np.argmin(total, axis=0)[None]

        def pick(arr):
            return np.take_along_axis(arr, best, axis=0)[0]

        t_star = pick(total)

        # a gap exists when both roots of one intersection type are valid
        gap_acc = ok[0] & ok[1]
        gap_brk = ok[2] & ok[3]
        A = a_max
        D = -a_min
        t_low = np.where(gap_brk, total[2], total[1])
        r = np.where(gap_brk, r_brk, r_acc)
        t_high = t_low + 2.0 * r * (1.0 / A + 1.0 / D)
        has_gap = (gap_acc | gap_brk) & (r >= SWITCH_VELOCITY_EPS) & (t_high - t_low > 2 * BOUNDARY_EPS)
    return _Profiles(
        t_star=t_star,
        a1=pick(a1),
        t1=pick(t1),
        a2=pick(a2),
        t2=pick(t2),
        v_switch=pick(vs),
        has_gap=has_gap,
        t_limit=np.where(has_gap, t_low, np.nan),
        t_mirror=np.where(has_gap, t_high, np.nan),
    )


def min_times(qI, vI, qG, vG, a_min, a_max) -> np.ndarray:
    """Minimum steering time for every axis (broadcasting)."""
    return _profiles(qI, vI, qG, vG, a_min, a_max).t_star


def _sweep(t_star, t_limit, t_mirror, has_gap) -> float:
    n = len(t_star)
    events = [(float(t), 0) for t in t_star]
    for lo, hi, g in zip(t_limit, t_mirror, has_gap):
        if g:
            events.append((float(lo), 1))
            events.append((float(hi), 0))
    # at equal times the increments come first: a gap is open at its endpoints
    events.sort()
    count = 0
    for t, kind in events:
        if kind == 0:
            count += 1
            if count == n:
                return t
        else:
            count -= 1
    raise RuntimeError("line sweep never reached full feasibility")  # pragma: no cover


# ---------------------------------------------------------------------------
# 1D operations


def min_time_steer_1d(xI: PhaseState1, xG: PhaseState1, b: AccelBounds) -> MinTimeSolution:
    """Minimum-time two-bang control from ``xI`` to ``xG``.

    Both parabola intersection types are evaluated and the fastest valid one
    is kept, so the result does not depend on which side of the goal the
    start lies.  Zero-length segments are kept.
    """
    b = AccelBounds(*b).check()
    p = _profiles(xI[0], xI[1], xG[0], xG[1], b.a_min, b.a_max)
    a1, t1, a2, t2 = float(p.a1[0]), float(p.t1[0]), float(p.a2[0]), float(p.t2[0])
    vs = float(p.v_switch[0])
    if abs(vs) < SWITCH_VELOCITY_EPS:
        vs = 0.0
    qs = xI[0] + xI[1] * t1 + 0.5 * a1 * t1 * t1
    control = (ControlSegment(a1, t1), ControlSegment(a2, t2))
    return MinTimeSolution(control, t1 + t2, PhaseState1(qs, vs))


def wait_profile_1d(xI: PhaseState1, xG: PhaseState1, b: AccelBounds) -> WaitProfile:
    b = AccelBounds(*b).check()
    p = _profiles(xI[0], xI[1], xG[0], xG[1], b.a_min, b.a_max)
    gap = (float(p.t_limit[0]), float(p.t_mirror[0])) if bool(p.has_gap[0]) else None
    return WaitProfile(float(p.t_star[0]), gap)


def _fixed_time_family(dq, vI, vG, a_min, a_max, T):
    """Two-segment control of total time ``T`` with the first bang extremal.

    Every two-segment solution has ``a1 = m + K/t1`` and ``a2 = m - K/t2`` with
    ``m`` the mean acceleration; fixing ``a1`` at a bound pins ``t1``.
    """
    dv = vG - vI
    m = dv / T
    K = (2.0 * dq - (vI + vG) * T) / T
    A, D = a_max, -a_min
    tol = 1e-12 * (abs(m) + abs(K) / T + A + D)
    if abs(K) <= tol * T:
        if -D - tol <= m <= A + tol:
            a = min(max(m, a_min), a_max)
            return ((a, T / 2.0), (a, T / 2.0))
        return None
    if K > 0:
        room1, room2, a_first = A - m, m + D, a_max
    else:
        room1, room2, a_first = m + D, A - m, a_min
    if room1 <= 0.0 or room2 <= 0.0:
        return None
    k = abs(K)
    lo = k / room1
    hi = T - k / room2
    if lo <= hi:
        t1 = lo
        a1 = a_first
    elif lo - hi <= 1e-9 * max(1.0, T):
        t1 = 0.5 * (lo + hi)
        a1 = m + K / t1
    else:
        return None
    t1 = min(max(t1, 0.0), T)
    t2 = T - t1
    if t2 > 0.0:
        a2 = m - K / t2
    else:
        a2 = a_first
    a1 = min(max(a1, a_min), a_max)
    a2 = min(max(a2, a_min), a_max)
    return ((a1, t1), (a2, t2))


def _fixed_time_symmetric(dq, vI, vG, a_min, a_max, T):
    """Solution with ``a2 = -a1`` and the smaller ``|a1|``, or ``None``."""
    dv = vG - vI
    p = dq - vI * T
    # T^2 a^2 + (2 dv T - 4 p) a - dv^2 = 0
    qa = T * T
    qb = 2.0 * dv * T - 4.0 * p
    qc = -dv * dv
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0.0:
        return None
    sq = math.sqrt(disc)
    roots = []
    if qa == 0.0 or (qb == 0.0 and qc == 0.0):
        # T^2 underflowed or the problem is trivial
        roots = [0.0]
    else:
        qq = -0.5 * (qb + math.copysign(sq, qb))
        if qq != 0.0:
            roots = [qq / qa, qc / qq]
        else:
            roots = [0.0]
    limit = min(a_max, -a_min)
    scale = abs(dq) + abs(vI) * T + abs(vG) * T + limit * T * T
    for a in sorted(roots, key=abs):
        if abs(a) > limit * (1.0 + 1e-12):
            continue
        if a == 0.0:
            if abs(dv) <= 1e-12 * (abs(vI) + abs(vG)) and abs(p) <= 1e-12 * scale:
                return ((0.0, T / 2.0), (0.0, T / 2.0))
            continue
        t1 = 0.5 * (T + dv / a)
        if not (-1e-12 * T <= t1 <= T * (1.0 + 1e-12)):
            continue
        t1 = min(max(t1, 0.0), T)
        t2 = T - t1
        a = min(max(a, -limit), limit)
        # verify both boundary conditions
        rv = a * t1 - a * t2 - dv
        rq = vI * T + 0.5 * a * t1 * t1 + a * t1 * t2 - 0.5 * a * t2 * t2 - dq
        if abs(rv) <= 1e-10 * (abs(dv) + limit * T) and abs(rq) <= 1e-10 * scale:
            return ((a, t1), (-a, t2))
    return None


def fixed_time_steer_1d(xI: PhaseState1, xG: PhaseState1, b: AccelBounds, t_w: float):
    """Two-segment control reaching ``xG`` at exactly ``t_w``.

    Returns ``None`` when no such control exists, i.e. ``t_w < t*`` or
    ``t_w`` lies strictly inside the gap interval.  Prefers equal and
    opposite accelerations of least magnitude, falling back to an extremal
    first bang.
    """
    if not t_w > 0.0:
        raise ValueError(f"arrival time must be positive, got {t_w}")
    b = AccelBounds(*b).check()
    prof = wait_profile_1d(xI, xG, b)
    if not prof.feasible(t_w, eps=BOUNDARY_EPS):
        return None
    sol = _solve_fixed(xI, xG, b, t_w)
    if sol is None:
        sol = _near_boundary(xI, xG, b, prof, t_w)
    return sol


def _near_boundary(xI, xG, b, prof, t_w):
    """Solution at the nearest feasible boundary time, last bang stretched to ``t_w``.

    Only reached when ``t_w`` is within the boundary tolerance of ``t*`` or
    a gap end, so the endpoint error is of that order.
    """
    edges = [prof.t_star] + (list(prof.gap) if prof.gap is not None else [])
    tb = min(edges, key=lambda t: abs(t - t_w))
    if tb == prof.t_star:
        sol = min_time_steer_1d(xI, xG, b).control
    else:
        sol = _solve_fixed(xI, xG, b, tb)
    if sol is None:
        return None
    (a1, t1), (a2, t2) = sol
    t2 = t2 + (t_w - tb)
    if t2 < 0.0:
        t1, t2 = t1 + t2, 0.0
    return (ControlSegment(a1, max(t1, 0.0)), ControlSegment(a2, t2))


def _solve_fixed(xI, xG, b, T):
    dq = xG[0] - xI[0]
    vI, vG = xI[1], xG[1]
    sol = _fixed_time_symmetric(dq, vI, vG, b.a_min, b.a_max, T)
    if sol is None:
        sol = _fixed_time_family(dq, vI, vG, b.a_min, b.a_max, T)
    if sol is None:
        return None
    return tuple(ControlSegment(float(a), float(t)) for a, t in sol)


def min_sync_time(profiles: Sequence[WaitProfile]) -> float:
    """Smallest time feasible for every axis, by sorting and sweeping events."""
    if len(profiles) == 0:
        raise ValueError("need at least one profile")
    t_star = [p.t_star for p in profiles]
    has_gap = [p.gap is not None for p in profiles]
    t_limit = [p.gap[0] if p.gap else 0.0 for p in profiles]
    t_mirror = [p.gap[1] if p.gap else 0.0 for p in profiles]
    return _sweep(t_star, t_limit, t_mirror, has_gap)


# ---------------------------------------------------------------------------
# n-dimensional operations


def _state_arrays(x):
    if isinstance(x, PhaseState):
        return x.q, x.q_dot
    q, v = x
    return np.atleast_1d(np.asarray(q, dtype=float)), np.atleast_1d(np.asarray(v, dtype=float))


def _nd_profiles(x, x2, bounds) -> _Profiles:
    q0, v0 = _state_arrays(x)
    q1, v1 = _state_arrays(x2)
    if q0.shape != q1.shape:
        raise ValueError(f"dimension mismatch: {q0.shape} vs {q1.shape}")
    a_min, a_max = as_bounds(bounds, q0.shape[0])
    return _profiles(q0, v0, q1, v1, a_min, a_max)


def _sync_from(p: _Profiles) -> float:
    if not np.any(p.has_gap):
        return float(np.max(p.t_star))
    return _sweep(p.t_star, p.t_limit, p.t_mirror, p.has_gap)


def steer_nd(xI, xG, bounds) -> SteeringPlan:
    """Time-optimal synchronised steering of ``n`` double integrators."""
    q0, v0 = _state_arrays(xI)
    q1, v1 = _state_arrays(xG)
    if np.array_equal(q0, q1) and np.array_equal(v0, v1):
        return SteeringPlan(tuple(() for _ in range(q0.shape[0])), 0.0)
    a_min, a_max = as_bounds(bounds, q0.shape[0])
    p = _profiles(q0, v0, q1, v1, a_min, a_max)
    T = _sync_from(p)
    per_axis = []
    for i in range(q0.shape[0]):
        if p.t_star[i] == T:
            ctrl = (
                ControlSegment(float(p.a1[i]), float(p.t1[i])),
                ControlSegment(float(p.a2[i]), float(p.t2[i])),
            )
        else:
            b = AccelBounds(float(a_min[i]), float(a_max[i]))
            ctrl = _solve_fixed((q0[i], v0[i]), (q1[i], v1[i]), b, T)
            if ctrl is None:  # pragma: no cover - the sweep guarantees feasibility
                raise RuntimeError(f"axis {i} cannot arrive at synchronised time {T!r}")
        per_axis.append(ctrl)
    return SteeringPlan(tuple(per_axis), float(T))


def rho1(x, x2, bounds) -> float:
    """Largest per-axis minimum time from ``x`` to ``x2`` (not symmetric)."""
    return float(np.max(_nd_profiles(x, x2, bounds).t_star))


def rho2(x, x2, bounds) -> float:
    """Synchronised arrival time from ``x`` to ``x2``, including waiting."""
    return _sync_from(_nd_profiles(x, x2, bounds))


def rho1_many(qs, vs, q_target, v_target, a_min, a_max, reverse: bool = False) -> np.ndarray:
    """``rho1`` from every row of ``(qs, vs)`` to one target.

    With ``reverse`` the cost is measured from the target to each row.
    """
    if reverse:
        t = _profiles(q_target[None, :], v_target[None, :], qs, vs, a_min, a_max).t_star
    else:
        t = _profiles(qs, vs, q_target[None, :], v_target[None, :], a_min, a_max).t_star
    return t.max(axis=1)
