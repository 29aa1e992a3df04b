"""Pure-numpy kernel implementations.

These are the reference versions of the hot numeric kernels.  The numba
backend in ``_kernels_numba.py`` mirrors every function here with an
``@njit`` loop implementation; ``kernels.py`` picks one of the two at
import time (see LAB_NO_NUMBA).

Conventions shared by both backends:
  * curves are passed as separate x1/x2 float64 arrays,
  * the defining polynomial is P = x1**2 - x2**b with integer b,
  * the weighted line integral uses the composite trapezoid rule on the
    stored samples:  sum over segments of dx2 * (P_i^2 + P_{i+1}^2) / 2.
"""

import numpy as np


def _p_poly(x1, x2, b):
    return x1 * x1 - x2 ** b


def holonomy_trapz(x1, x2, b):
    """Trapezoid value of the weighted line integral int P^2 dx2."""
    p2 = _p_poly(x1, x2, b) ** 2
    dx2 = np.diff(x2)
    return float(np.sum(dx2 * 0.5 * (p2[:-1] + p2[1:])))


def holonomy_cumsum(x1, x2, b):
    """Running trapezoid integral, one value per sample (first is 0)."""
    p2 = _p_poly(x1, x2, b) ** 2
    dx2 = np.diff(x2)
    out = np.empty_like(x1)
    out[0] = 0.0
    np.cumsum(dx2 * 0.5 * (p2[:-1] + p2[1:]), out=out[1:])
    return out


def polyline_length(x1, x2):
    return float(np.sum(np.hypot(np.diff(x1), np.diff(x2))))


def length_and_grad(x1, x2):
    """Chord-sum length and its gradient wrt every node coordinate."""
    dx = np.diff(x1)
    dy = np.diff(x2)
    seg = np.hypot(dx, dy)
    seg_safe = np.where(seg > 0.0, seg, 1.0)
    ux = dx / seg_safe
    uy = dy / seg_safe
    gx = np.zeros_like(x1)
    gy = np.zeros_like(x2)
    gx[:-1] -= ux
    gx[1:] += ux
    gy[:-1] -= uy
    gy[1:] += uy
    return float(np.sum(seg)), gx, gy


def holonomy_and_grad(x1, x2, b):
    """Trapezoid weighted integral and its gradient wrt node coordinates."""
    p = _p_poly(x1, x2, b)
    p2 = p * p
    dx2 = np.diff(x2)
    val = float(np.sum(dx2 * 0.5 * (p2[:-1] + p2[1:])))
    # d(P^2)/dx1 = 4 x1 P,  d(P^2)/dx2 = -2 b x2^(b-1) P
    dp2_dx1 = 4.0 * x1 * p
    dp2_dx2 = -2.0 * b * x2 ** (b - 1) * p
    w = np.zeros_like(x1)          # trapezoid weight of node k: (x2[k+1]-x2[k-1])/2
    w[:-1] += 0.5 * dx2
    w[1:] += 0.5 * dx2
    gx = w * dp2_dx1
    gy = w * dp2_dx2
    # dependence through the dx2 factors
    avg = 0.5 * (p2[:-1] + p2[1:])
    gy[:-1] -= avg
    gy[1:] += avg
    return val, gx, gy


def rk4_angle(x10, x20, theta0, lam, b, h, n):
    """Fixed-step RK4 for the arc-length angle system.

    x1' = cos(theta), x2' = sin(theta), theta' = lam * 4 x1 (x1^2 - x2^b).
    Returns arrays of length n+1 (including the initial state).
    """
    xs = np.empty(n + 1)
    ys = np.empty(n + 1)
    ts = np.empty(n + 1)
    x, y, th = float(x10), float(x20), float(theta0)
    xs[0], ys[0], ts[0] = x, y, th
    for i in range(n):
        k1 = _angle_rhs(x, y, th, lam, b)
        k2 = _angle_rhs(x + 0.5 * h * k1[0], y + 0.5 * h * k1[1], th + 0.5 * h * k1[2], lam, b)
        k3 = _angle_rhs(x + 0.5 * h * k2[0], y + 0.5 * h * k2[1], th + 0.5 * h * k2[2], lam, b)
        k4 = _angle_rhs(x + h * k3[0], y + h * k3[1], th + h * k3[2], lam, b)
        x += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        y += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        th += h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        xs[i + 1], ys[i + 1], ts[i + 1] = x, y, th
    return xs, ys, ts


def _angle_rhs(x, y, th, lam, b):
    return (np.cos(th), np.sin(th), lam * 4.0 * x * (x * x - y ** b))


def rk4_hamiltonian(p1, p2, p3, x1, x2, b, h, n):
    """Fixed-step RK4 for the 5-dim covector system; returns (n+1, 5) array."""
    out = np.empty((n + 1, 5))
    s = np.array([p1, p2, p3, x1, x2], dtype=float)
    out[0] = s
    for i in range(n):
        k1 = _ham_rhs(s, b)
        k2 = _ham_rhs(s + 0.5 * h * k1, b)
        k3 = _ham_rhs(s + 0.5 * h * k2, b)
        k4 = _ham_rhs(s + h * k3, b)
        s = s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = s
    return out


def _ham_rhs(s, b):
    p1, p2, p3, x1, x2 = s
    p = x1 * x1 - x2 ** b
    h2 = p2 + p * p * p3
    return np.array([
        -4.0 * x1 * p * h2 * p3,
        2.0 * b * x2 ** (b - 1) * p * h2 * p3,
        0.0,
        p1,
        h2,
    ])


def winding_numbers(px, py, vx, vy):
    """Signed crossing counts of query points wrt a closed polygon.

    ``vx``/``vy`` are the polygon vertices with first vertex repeated last.
    Half-open edge convention: a crossing at the lower endpoint counts,
    at the upper endpoint it does not.
    """
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    wn = np.zeros(px.shape, dtype=np.int64)
    for k in range(len(vx) - 1):
        ax, ay = vx[k], vy[k]
        bx, by = vx[k + 1], vy[k + 1]
        cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        up = (ay <= py) & (py < by) & (cross > 0.0)
        dn = (by <= py) & (py < ay) & (cross < 0.0)
        wn += up.astype(np.int64) - dn.astype(np.int64)
    return wn


def segment_intersections(x, y, closed, tol):
    """All transversal intersections between non-adjacent polyline segments.

    Returns (i, j, ti, tj) arrays with i < j, ti/tj parametric positions in
    [0, 1] on the two segments, plus a count of degenerate (collinear
    overlapping) pairs found.
    """
    m = len(x) - 1
    hits_i, hits_j, hits_t, hits_u = [], [], [], []
    degenerate = 0
    ax = x[:-1]
    ay = y[:-1]
    dx = np.diff(x)
    dy = np.diff(y)
    scale = max(np.ptp(x), np.ptp(y), 1e-300)
    for i in range(m - 2):
        j0 = i + 2
        jmax = m
        js = np.arange(j0, jmax)
        if closed and i == 0 and len(js) > 0 and js[-1] == m - 1:
            js = js[:-1]
        if len(js) == 0:
            continue
        rx = ax[js] - ax[i]
        ry = ay[js] - ay[i]
        denom = dx[i] * dy[js] - dy[i] * dx[js]
        tnum = rx * dy[js] - ry * dx[js]
        unum = rx * dy[i] - ry * dx[i]
        small = np.abs(denom) <= 1e-14 * scale * scale
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(small, np.nan, tnum / denom)
            u = np.where(small, np.nan, unum / denom)
        ok = (~small) & (t >= -tol) & (t <= 1.0 + tol) & (u >= -tol) & (u <= 1.0 + tol)
        # collinear overlap check for the degenerate pairs
        if np.any(small):
            for j in js[small]:
                if _collinear_overlap(x, y, i, int(j), scale):
                    degenerate += 1
        for k in np.nonzero(ok)[0]:
            hits_i.append(i)
            hits_j.append(int(js[k]))
            hits_t.append(float(np.clip(t[k], 0.0, 1.0)))
            hits_u.append(float(np.clip(u[k], 0.0, 1.0)))
    return (np.array(hits_i, dtype=np.int64), np.array(hits_j, dtype=np.int64),
            np.array(hits_t), np.array(hits_u), degenerate)


def _collinear_overlap(x, y, i, j, scale):
    # parallel segments: overlap iff endpoints of j lie on the line of i
    # within tolerance and the projections onto that line overlap
    dxi, dyi = x[i + 1] - x[i], y[i + 1] - y[i]
    li = np.hypot(dxi, dyi)
    if li == 0.0:
        return False
    d1 = abs(dxi * (y[j] - y[i]) - dyi * (x[j] - x[i])) / li
    d2 = abs(dxi * (y[j + 1] - y[i]) - dyi * (x[j + 1] - x[i])) / li
    if max(d1, d2) > 1e-12 * (1.0 + scale):
        return False
    s1 = (dxi * (x[j] - x[i]) + dyi * (y[j] - y[i])) / li
    s2 = (dxi * (x[j + 1] - x[i]) + dyi * (y[j + 1] - y[i])) / li
    lo, hi = min(s1, s2), max(s1, s2)
    return hi > 1e-12 * (1.0 + scale) and lo < li * (1.0 - 1e-12)
