"""Winding numbers, weighted areas, turning, and self-intersection tools.

The weighted area of a closed plane curve is the line integral of
P^2 dx2, shared with the lift integral in ``core``; by Stokes it equals
the integral of Q over the plane weighted by the winding number.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import PlanarCurve, eval_P, eval_Ptilde, eval_Q


@dataclass
class ClosedCurve:
    polyline: PlanarCurve
    tol_close: float = 1e-10

    def __post_init__(self):
        c = self.polyline
        gap = math.hypot(c.x1[-1] - c.x1[0], c.x2[-1] - c.x2[0])
        if gap > self.tol_close:
            raise ValueError(f"endpoints differ by {gap:.3e}, curve not closed")


@dataclass
class Loop:
    s_minus: float
    s_plus: float
    closure_point: tuple

    def __post_init__(self):
        if not self.s_minus < self.s_plus:
            raise ValueError("loop needs s_minus < s_plus")


@dataclass
class LoopStats:
    beta_l: float
    t_l: float
    x_l: float
    y_l: float
    delta_l: float
    length: float
    weighted_area: float


@dataclass
class SignPartition:
    taus: np.ndarray
    interval_signs: list
    degenerate: bool = False


def winding_number(closed, point):
    """Signed crossing count of `point`; errors if the point is on the curve."""
    c = closed.polyline
    px, py = float(point[0]), float(point[1])
    # distance to the polyline (needed to reject on-curve queries)
    ax, ay = c.x1[:-1], c.x2[:-1]
    dx, dy = np.diff(c.x1), np.diff(c.x2)
    seg2 = dx * dx + dy * dy
    tproj = np.clip(np.where(seg2 > 0, ((px - ax) * dx + (py - ay) * dy)
                             / np.where(seg2 > 0, seg2, 1.0), 0.0), 0.0, 1.0)
    dist = np.min(np.hypot(ax + tproj * dx - px, ay + tproj * dy - py))
    scale = 1.0 + max(np.ptp(c.x1), np.ptp(c.x2))
    if dist <= 1e-12 * scale:
        raise ValueError("query point lies on the curve")
    wn = kernels.winding_numbers(np.array([px]), np.array([py]), c.x1, c.x2)
    return int(wn[0])


def weighted_area_line(params, closed):
    """Line-integral weighted area (trapezoid on the stored samples)."""
    c = closed.polyline
    return kernels.holonomy_trapz(c.x1, c.x2, params.b)


def weighted_area_region(params, closed, grid_n=512):
    """Region-form weighted area: sum of winding * Q over a uniform grid."""
    if grid_n < 64:
        raise ValueError("grid_n must be at least 64")
    c = closed.polyline
    lo1, hi1 = np.min(c.x1), np.max(c.x1)
    lo2, hi2 = np.min(c.x2), np.max(c.x2)
    if hi1 <= lo1 or hi2 <= lo2:
        return 0.0
    h1 = (hi1 - lo1) / grid_n
    h2 = (hi2 - lo2) / grid_n
    cx = lo1 + (np.arange(grid_n) + 0.5) * h1
    cy = lo2 + (np.arange(grid_n) + 0.5) * h2
    gx, gy = np.meshgrid(cx, cy, indexing="ij")
    wn = kernels.winding_numbers(gx.ravel(), gy.ravel(), c.x1, c.x2)
    qv = eval_Q(params, gx.ravel(), gy.ravel())
    return float(np.sum(wn * qv) * h1 * h2)


def rado_check(params, closed, sup_grid=512):
    """Isoperimetric check |A| <= L^2/(4 pi) * sup |Q| over the bounding box."""
    c = closed.polyline
    lhs = abs(weighted_area_line(params, closed))
    length = kernels.polyline_length(c.x1, c.x2)
    g1 = np.linspace(np.min(c.x1), np.max(c.x1), sup_grid)
    g2 = np.linspace(np.min(c.x2), np.max(c.x2), sup_grid)
    gx, gy = np.meshgrid(g1, g2, indexing="ij")
    sup_q = float(np.max(np.abs(eval_Q(params, gx, gy))))
    rhs = length * length / (4.0 * math.pi) * sup_q
    return lhs, rhs, bool(lhs <= rhs * (1.0 + 1e-9))


def _exterior_angle(ux, uy, vx, vy):
    return math.atan2(ux * vy - uy * vx, ux * vx + uy * vy)


def total_turning(obj):
    """Total turning of a closed polyline or of an extremal trace.

    For a ``ClosedCurve``, sums exterior angles at every vertex including
    the wrap-around; +-2 pi for simple curves.  For an ``ExtremalTrace``,
    the accumulated angle difference theta(T) - theta(0) is used.  Exact
    cusps (exterior angle within 1e-9 of pi) are rejected.
    """
    if hasattr(obj, "theta"):
        return float(obj.theta[-1] - obj.theta[0])
    if isinstance(obj, ClosedCurve):
        c = obj.polyline
        dx = np.diff(c.x1)
        dy = np.diff(c.x2)
        total = 0.0
        m = len(dx)
        for k in range(m):
            kn = (k + 1) % m
            ang = _exterior_angle(dx[k], dy[k], dx[kn], dy[kn])
            if abs(abs(ang) - math.pi) < 1e-9:
                raise ValueError("cusp vertex (exterior angle at pi)")
            total += ang
        return total
    # open polyline: chord-angle increments only
    dx = np.diff(obj.x1)
    dy = np.diff(obj.x2)
    total = 0.0
    for k in range(len(dx) - 1):
        ang = _exterior_angle(dx[k], dy[k], dx[k + 1], dy[k + 1])
        if abs(abs(ang) - math.pi) < 1e-9:
            raise ValueError("cusp vertex (exterior angle at pi)")
        total += ang
    return total


def detect_loops(curve, tol=1e-12):
    """All self-intersections of the polyline as (s_minus, s_plus) loops.

    Intersections between non-adjacent segments are solved in closed form;
    results are sorted by closing parameter s_plus.  Collinear overlapping
    segment pairs are rejected.  On closed curves every crossing (a, b)
    also yields its complement interval, reported with s_plus wrapped past
    the parameter range by the period.
    """
    closed = math.hypot(curve.x1[-1] - curve.x1[0],
                        curve.x2[-1] - curve.x2[0]) <= 1e-10
    hi, hj, ht, hu, degenerate = kernels.segment_intersections(
        curve.x1, curve.x2, closed, tol)
    if degenerate:
        raise ValueError(f"{degenerate} collinear overlapping segment pairs")
    loops = []
    t = curve.t
    period = t[-1] - t[0]
    for i, j, ti, tj in zip(hi, hj, ht, hu):
        s_minus = t[i] + ti * (t[i + 1] - t[i])
        s_plus = t[j] + tj * (t[j + 1] - t[j])
        px = curve.x1[i] + ti * (curve.x1[i + 1] - curve.x1[i])
        py = curve.x2[i] + ti * (curve.x2[i + 1] - curve.x2[i])
        # adjacent-in-parameter hits at the shared node are not loops
        if s_plus - s_minus <= tol:
            continue
        point = (float(px), float(py))
        loops.append(Loop(s_minus=float(s_minus), s_plus=float(s_plus),
                          closure_point=point))
        if closed:
            loops.append(Loop(s_minus=float(s_plus),
                              s_plus=float(s_minus + period),
                              closure_point=point))
    loops.sort(key=lambda l: (l.s_plus, l.s_minus))
    return loops


def first_simple_loop(loops):
    """The loop with minimal closing parameter, or None."""
    return loops[0] if loops else None


def _loop_polyline(curve, loop):
    """Closed polyline of the loop: closure point, interior nodes, back.

    Complement loops on closed curves have s_plus wrapped past the end of
    the parameter range; their interior is taken modulo the period.
    """
    t = curve.t
    px, py = loop.closure_point
    if loop.s_plus > t[-1]:
        wrap = loop.s_plus - (t[-1] - t[0])
        idx = np.concatenate((np.nonzero(t > loop.s_minus)[0],
                              np.nonzero(t < wrap)[0]))
    else:
        idx = np.nonzero((t > loop.s_minus) & (t < loop.s_plus))[0]
    x1 = np.concatenate(([px], curve.x1[idx], [px]))
    x2 = np.concatenate(([py], curve.x2[idx], [py]))
    tt = np.concatenate(([loop.s_minus], t[idx], [loop.s_plus]))
    return tt, x1, x2


def loop_stats(params, curve, loop):
    """Max-|P| data and the scale-weighted delta quantity of a loop."""
    tt, x1, x2 = _loop_polyline(curve, loop)
    pv = np.abs(eval_P(params, x1, x2))
    k = int(np.argmax(pv))
    beta_l = float(pv[k])
    x_l, y_l = float(x1[k]), float(x2[k])
    if x_l == 0.0 and y_l == 0.0:
        raise ValueError("loop max-|P| point at the origin: delta undefined")
    inv = []
    if x_l != 0.0:
        inv.append(1.0 / x_l)
    if y_l != 0.0:
        inv.append(1.0 / abs(y_l) ** params.q)
    delta_l = beta_l * min(inv)
    return LoopStats(beta_l=beta_l, t_l=float(tt[k]), x_l=x_l, y_l=y_l,
                     delta_l=float(delta_l),
                     length=kernels.polyline_length(x1, x2),
                     weighted_area=kernels.holonomy_trapz(x1, x2, params.b))


def sign_partition(params, curve, eta_tol=None):
    """Crossing times and interval signs of Ptilde along the curve.

    Values within the band [-eta_tol, eta_tol] are treated as zero; if the
    whole curve sits in the band the partition is flagged degenerate.
    """
    v = np.atleast_1d(eval_Ptilde(params, curve.x1, curve.x2))
    if eta_tol is None:
        eta_tol = 1e-13 * (1.0 + float(np.max(np.abs(v))))
    if eta_tol < 0.0:
        raise ValueError("eta_tol must be nonnegative")
    signs = np.where(v > eta_tol, 1, np.where(v < -eta_tol, -1, 0))
    nz = np.nonzero(signs)[0]
    if len(nz) == 0:
        return SignPartition(taus=np.array([]), interval_signs=[],
                             degenerate=True)
    taus = []
    labels = [int(signs[nz[0]])]
    for a, b_ in zip(nz[:-1], nz[1:]):
        if signs[a] != signs[b_]:
            # linear zero crossing between the bracketing samples
            frac = v[a] / (v[a] - v[b_])
            taus.append(curve.t[a] + frac * (curve.t[b_] - curve.t[a]))
            labels.append(int(signs[b_]))
    return SignPartition(taus=np.array(taus), interval_signs=labels)


def partition_to_json(loops, partition=None):
    out = {"loops": [{"s_minus": l.s_minus, "s_plus": l.s_plus,
                      "point": [l.closure_point[0], l.closure_point[1]]}
                     for l in loops]}
    if partition is not None:
        out["taus"] = [float(x) for x in partition.taus]
        out["signs"] = ["+" if s > 0 else "-" for s in partition.interval_signs]
    return json.dumps(out)
