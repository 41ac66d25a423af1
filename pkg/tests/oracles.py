"""Reference solutions computed independently of the library's closed forms.

They are slow and simple on purpose: grids, root finding and numerical
integration rather than parabola intersections.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq


def two_bang_end(q0, v0, a1, t1, a2, t2):
    q1 = q0 + v0 * t1 + 0.5 * a1 * t1 * t1
    v1 = v0 + a1 * t1
    return q1 + v1 * t2 + 0.5 * a2 * t2 * t2, v1 + a2 * t2


def two_bang_grid_oracle(qI, vI, qG, vG, a_min, a_max, horizon=80.0, grid=4001):
    """Minimum time over all two-bang controls with extremal accelerations.

    For each bang order the velocity condition fixes ``t2`` as a function of
    ``t1``; the position residual is scanned on a ``t1`` grid and every sign
    change is refined with Brent's method.  Returns ``(time, (a1, t1, a2, t2))``.
    """
    best = (math.inf, None)
    # work in displacement so tiny misses are not lost to rounding of qI
    dq = qG - qI
    for a1, a2 in ((a_max, a_min), (a_min, a_max)):
        # t2 >= 0 requires t1 >= t_lo
        t_lo = max(0.0, (vG - vI) / a1)

        def t2_of(t1):
            return (vG - vI - a1 * t1) / a2

        def resid(t1):
            q, _ = two_bang_end(0.0, vI, a1, t1, a2, t2_of(t1))
            return q - dq

        ts = t_lo + np.linspace(0.0, horizon, grid)
        q, _ = two_bang_end(0.0, vI, a1, ts, a2, t2_of(ts))
        r = q - dq
        roots = []
        # scale of the terms that make up the residual at the first grid point
        size = max(abs(dq), abs(vI) * t_lo, abs(a1) * t_lo * t_lo)
        if abs(r[0]) <= 1e-13 * size:
            roots.append(ts[0])
        idx = np.flatnonzero(np.sign(r[:-1]) * np.sign(r[1:]) < 0)
        for k in idx:
            roots.append(brentq(resid, ts[k], ts[k + 1], xtol=1e-14, rtol=1e-15))
        roots += list(ts[1:][r[1:] == 0.0])
        for t1 in roots:
            t2 = max(0.0, t2_of(t1))
            if t1 + t2 < best[0]:
                best = (t1 + t2, (a1, t1, a2, t2))
    return best


def fixed_time_feasible_oracle(qI, vI, qG, vG, a_min, a_max, T, grid=20001, tol=1e-6):
    """Whether some two-segment control reaches ``(qG, vG)`` at exactly ``T``.

    Dense grid over the switch time ``t1``.  For fixed ``t1`` the velocity
    condition gives ``a2`` as an affine function of ``a1`` and the position
    residual is affine in ``a1`` too, so ``a1`` is solved exactly; the pair is
    accepted when both accelerations are in bounds and the residual of the
    position condition is below ``tol``.
    """
    t1 = np.linspace(0.0, T, grid)
    t2 = T - t1
    dv = vG - vI
    # a2 = (dv - a1 t1) / t2, position: vI T + 0.5 a1 t1^2 + a1 t1 t2 + 0.5 a2 t2^2 = dq
    dq = qG - qI
    # residual(a1) = c0 + c1 a1 with a2 substituted (t2 > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        c0 = vI * T + 0.5 * dv * t2 - dq
        c1 = 0.5 * t1 * t1 + t1 * t2 - 0.5 * t1 * t2
        a1 = np.where(np.abs(c1) > 0, -c0 / c1, np.nan)
        a2 = np.where(t2 > 0, (dv - a1 * t1) / t2, np.nan)
    slack = 1e-9 * max(1.0, abs(a_min), abs(a_max))
    ok = (
        np.isfinite(a1) & np.isfinite(a2)
        & (a1 >= a_min - slack) & (a1 <= a_max + slack)
        & (a2 >= a_min - slack) & (a2 <= a_max + slack)
    )
    # one segment over the whole time (t1 = 0 or t2 = 0)
    a = dv / T
    q, _ = two_bang_end(qI, vI, a, T, 0.0, 0.0)
    if a_min - slack <= a <= a_max + slack and abs(q - qG) < tol:
        return True
    k = np.flatnonzero(ok)
    q, v = two_bang_end(qI, vI, a1[k], t1[k], a2[k], t2[k])
    good = (np.abs(q - qG) < tol) & (np.abs(v - vG) < tol)
    if good.any():
        return True
    # At the edge of the feasible set the solution is isolated and has one
    # acceleration saturated; search those branches with root refinement.
    for first in (True, False):
        for A in (a_min, a_max):
            def other(t1):
                t2 = T - t1
                return (dv - A * t1) / t2 if first else (dv - A * t2) / t1

            def resid(t1):
                o = other(t1)
                a, b = (A, o) if first else (o, A)
                return two_bang_end(qI, vI, a, t1, b, T - t1)[0] - qG

            # uniform in the middle, geometric toward both ends where a
            # saturated bang can be arbitrarily short
            ends = T * np.logspace(-12, -2, 200)
            ts = np.unique(np.concatenate([np.linspace(0.0, T, 2001)[1:-1], ends, T - ends]))
            ts = ts[(ts > 0.0) & (ts < T)]
            r = np.array([resid(t) for t in ts])
            for j in np.flatnonzero(np.sign(r[:-1]) * np.sign(r[1:]) <= 0):
                t = brentq(resid, ts[j], ts[j + 1], xtol=1e-15, rtol=1e-15)
                if a_min - slack <= other(t) <= a_max + slack and abs(resid(t)) < tol:
                    return True
    return False


def naive_sync_time(t_star, gaps):
    """Earliest time feasible for every axis by checking every candidate time.

    ``gaps[i]`` is ``None`` or an open interval ``(lo, hi)``.  Candidates are
    the ``t_star`` values and the gap upper ends; each one is tested against
    every axis.
    """
    cands = sorted(set(list(t_star) + [g[1] for g in gaps if g is not None]))
    for t in cands:
        if all(t >= ts for ts in t_star) and not any(
            g is not None and g[0] < t < g[1] for g in gaps
        ):
            return t
    raise AssertionError("no feasible candidate")


def rk4_states(q0, v0, accel_of_t, t_end, h=1e-4, breaks=()):
    """Integrate ``q'' = a(t)`` with classic RK4 and return the final ``(q, v)``.

    ``breaks`` are times where ``a`` jumps; the step grid is aligned to them
    so no RK4 step straddles a discontinuity.
    """
    y = np.array([q0, v0], dtype=float)
    knots = [0.0] + sorted(b for b in breaks if 0.0 < b < t_end) + [t_end]

    def f(t, y, a):
        return np.array([y[1], a])

    for lo, hi in zip(knots[:-1], knots[1:]):
        if hi <= lo:
            continue
        # a is constant on the open piece; sample it at the midpoint
        a = accel_of_t(0.5 * (lo + hi))
        n = max(1, int(math.ceil((hi - lo) / h)))
        step = (hi - lo) / n
        t = lo
        for _ in range(n):
            k1 = f(t, y, a)
            k2 = f(t + step / 2, y + step / 2 * k1, a)
            k3 = f(t + step / 2, y + step / 2 * k2, a)
            k4 = f(t + step, y + step * k3, a)
            y = y + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += step
    return y


def piecewise_accel(control):
    """``a(t)`` for a list of ``(accel, duration)`` segments, right-continuous."""
    edges = np.cumsum([0.0] + [d for _, d in control])
    accs = [a for a, _ in control]

    def a_of_t(t):
        k = int(np.searchsorted(edges, t, side="right")) - 1
        k = min(max(k, 0), len(accs) - 1)
        return accs[k]

    return a_of_t


def point_on_segment_residual(p, a, b):
    """Distance from ``p`` to the line through ``a`` and ``b`` plus overshoot past the ends."""
    d = b - a
    L = np.linalg.norm(d)
    s = np.dot(p - a, d) / (L * L)
    perp = np.linalg.norm(p - (a + s * d))
    over = max(0.0, -s, s - 1.0) * L
    return perp + over
