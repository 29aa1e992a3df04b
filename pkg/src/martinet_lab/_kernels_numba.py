"""Numba-jitted kernel implementations (hot path).

Mirrors the public functions of ``_kernels_numpy.py`` with explicit loops
compiled by ``@njit``.  Import of this module requires numba; the dispatch
in ``kernels.py`` falls back to the numpy backend when numba is missing or
disabled via LAB_NO_NUMBA.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _ipow(x, b):
    out = 1.0
    for _ in range(b):
        out *= x
    return out


@njit(cache=True)
def holonomy_trapz(x1, x2, b):
    acc = 0.0
    c = 0.0  # Kahan compensation; values can be ~1e-27 with many tiny terms
    pprev = x1[0] * x1[0] - _ipow(x2[0], b)
    p2prev = pprev * pprev
    for i in range(1, len(x1)):
        p = x1[i] * x1[i] - _ipow(x2[i], b)
        p2 = p * p
        term = (x2[i] - x2[i - 1]) * 0.5 * (p2prev + p2)
        yk = term - c
        tk = acc + yk
        c = (tk - acc) - yk
        acc = tk
        p2prev = p2
    return acc


@njit(cache=True)
def holonomy_cumsum(x1, x2, b):
    out = np.empty_like(x1)
    out[0] = 0.0
    acc = 0.0
    pprev = x1[0] * x1[0] - _ipow(x2[0], b)
    p2prev = pprev * pprev
    for i in range(1, len(x1)):
        p = x1[i] * x1[i] - _ipow(x2[i], b)
        p2 = p * p
        acc += (x2[i] - x2[i - 1]) * 0.5 * (p2prev + p2)
        out[i] = acc
        p2prev = p2
    return out


@njit(cache=True)
def polyline_length(x1, x2):
    acc = 0.0
    for i in range(1, len(x1)):
        acc += math.hypot(x1[i] - x1[i - 1], x2[i] - x2[i - 1])
    return acc


@njit(cache=True)
def length_and_grad(x1, x2):
    n = len(x1)
    gx = np.zeros(n)
    gy = np.zeros(n)
    total = 0.0
    for i in range(n - 1):
        dx = x1[i + 1] - x1[i]
        dy = x2[i + 1] - x2[i]
        seg = math.hypot(dx, dy)
        total += seg
        if seg > 0.0:
            ux = dx / seg
            uy = dy / seg
            gx[i] -= ux
            gx[i + 1] += ux
            gy[i] -= uy
            gy[i + 1] += uy
    return total, gx, gy


@njit(cache=True)
def holonomy_and_grad(x1, x2, b):
    n = len(x1)
    gx = np.zeros(n)
    gy = np.zeros(n)
    p = np.empty(n)
    for i in range(n):
        p[i] = x1[i] * x1[i] - _ipow(x2[i], b)
    val = 0.0
    c = 0.0
    for i in range(n - 1):
        dx2 = x2[i + 1] - x2[i]
        avg = 0.5 * (p[i] * p[i] + p[i + 1] * p[i + 1])
        term = dx2 * avg
        yk = term - c
        tk = val + yk
        c = (tk - val) - yk
        val = tk
        gx[i] += 0.5 * dx2 * 4.0 * x1[i] * p[i]
        gx[i + 1] += 0.5 * dx2 * 4.0 * x1[i + 1] * p[i + 1]
        gy[i] += 0.5 * dx2 * (-2.0 * b * _ipow(x2[i], b - 1) * p[i])
        gy[i + 1] += 0.5 * dx2 * (-2.0 * b * _ipow(x2[i + 1], b - 1) * p[i + 1])
        gy[i] -= avg
        gy[i + 1] += avg
    return val, gx, gy


@njit(cache=True)
def rk4_angle(x10, x20, theta0, lam, b, h, n):
    xs = np.empty(n + 1)
    ys = np.empty(n + 1)
    ts = np.empty(n + 1)
    x, y, th = x10, x20, theta0
    xs[0], ys[0], ts[0] = x, y, th
    for i in range(n):
        c1x = math.cos(th)
        c1y = math.sin(th)
        c1t = lam * 4.0 * x * (x * x - _ipow(y, b))
        ax, ay, at = x + 0.5 * h * c1x, y + 0.5 * h * c1y, th + 0.5 * h * c1t
        c2x = math.cos(at)
        c2y = math.sin(at)
        c2t = lam * 4.0 * ax * (ax * ax - _ipow(ay, b))
        ax, ay, at = x + 0.5 * h * c2x, y + 0.5 * h * c2y, th + 0.5 * h * c2t
        c3x = math.cos(at)
        c3y = math.sin(at)
        c3t = lam * 4.0 * ax * (ax * ax - _ipow(ay, b))
        ax, ay, at = x + h * c3x, y + h * c3y, th + h * c3t
        c4x = math.cos(at)
        c4y = math.sin(at)
        c4t = lam * 4.0 * ax * (ax * ax - _ipow(ay, b))
        x += h / 6.0 * (c1x + 2.0 * c2x + 2.0 * c3x + c4x)
        y += h / 6.0 * (c1y + 2.0 * c2y + 2.0 * c3y + c4y)
        th += h / 6.0 * (c1t + 2.0 * c2t + 2.0 * c3t + c4t)
        xs[i + 1], ys[i + 1], ts[i + 1] = x, y, th
    return xs, ys, ts


@njit(cache=True)
def _ham_rhs(s, b, out):
    p1, p2, p3, x1, x2 = s[0], s[1], s[2], s[3], s[4]
    p = x1 * x1 - _ipow(x2, b)
    h2 = p2 + p * p * p3
    out[0] = -4.0 * x1 * p * h2 * p3
    out[1] = 2.0 * b * _ipow(x2, b - 1) * p * h2 * p3
    out[2] = 0.0
    out[3] = p1
    out[4] = h2


@njit(cache=True)
def rk4_hamiltonian(p1, p2, p3, x1, x2, b, h, n):
    out = np.empty((n + 1, 5))
    s = np.array([p1, p2, p3, x1, x2])
    out[0] = s
    k1 = np.empty(5)
    k2 = np.empty(5)
    k3 = np.empty(5)
    k4 = np.empty(5)
    tmp = np.empty(5)
    for i in range(n):
        _ham_rhs(s, b, k1)
        for m in range(5):
            tmp[m] = s[m] + 0.5 * h * k1[m]
        _ham_rhs(tmp, b, k2)
        for m in range(5):
            tmp[m] = s[m] + 0.5 * h * k2[m]
        _ham_rhs(tmp, b, k3)
        for m in range(5):
            tmp[m] = s[m] + h * k3[m]
        _ham_rhs(tmp, b, k4)
        for m in range(5):
            s[m] = s[m] + h / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m])
        out[i + 1] = s
    return out


@njit(cache=True)
def winding_numbers(px, py, vx, vy):
    wn = np.zeros(len(px), dtype=np.int64)
    ne = len(vx) - 1
    for q in range(len(px)):
        x = px[q]
        y = py[q]
        w = 0
        for k in range(ne):
            ax, ay = vx[k], vy[k]
            bx, by = vx[k + 1], vy[k + 1]
            if ay <= y:
                if by > y:
                    if (bx - ax) * (y - ay) - (by - ay) * (x - ax) > 0.0:
                        w += 1
            else:
                if by <= y:
                    if (bx - ax) * (y - ay) - (by - ay) * (x - ax) < 0.0:
                        w -= 1
        wn[q] = w
    return wn


@njit(cache=True)
def segment_intersections(x, y, closed, tol):
    m = len(x) - 1
    cap = 64
    hi = np.empty(cap, dtype=np.int64)
    hj = np.empty(cap, dtype=np.int64)
    ht = np.empty(cap)
    hu = np.empty(cap)
    nhit = 0
    degenerate = 0
    scale = max(np.max(x) - np.min(x), np.max(y) - np.min(y), 1e-300)
    denom_tol = 1e-14 * scale * scale
    for i in range(m - 2):
        x1a, y1a = x[i], y[i]
        dxi, dyi = x[i + 1] - x1a, y[i + 1] - y1a
        bx_lo = min(x1a, x[i + 1])
        bx_hi = max(x1a, x[i + 1])
        by_lo = min(y1a, y[i + 1])
        by_hi = max(y1a, y[i + 1])
        for j in range(i + 2, m):
            if closed and i == 0 and j == m - 1:
                continue
            if min(x[j], x[j + 1]) > bx_hi + tol or max(x[j], x[j + 1]) < bx_lo - tol:
                continue
            if min(y[j], y[j + 1]) > by_hi + tol or max(y[j], y[j + 1]) < by_lo - tol:
                continue
            dxj, dyj = x[j + 1] - x[j], y[j + 1] - y[j]
            denom = dxi * dyj - dyi * dxj
            rx = x[j] - x1a
            ry = y[j] - y1a
            if abs(denom) <= denom_tol:
                li = math.hypot(dxi, dyi)
                if li > 0.0:
                    d1 = abs(dxi * ry - dyi * rx) / li
                    d2 = abs(dxi * (y[j + 1] - y1a) - dyi * (x[j + 1] - x1a)) / li
                    if max(d1, d2) <= 1e-12 * (1.0 + scale):
                        s1 = (dxi * rx + dyi * ry) / li
                        s2 = (dxi * (x[j + 1] - x1a) + dyi * (y[j + 1] - y1a)) / li
                        lo = min(s1, s2)
                        hi2 = max(s1, s2)
                        if hi2 > 1e-12 * (1.0 + scale) and lo < li * (1.0 - 1e-12):
                            degenerate += 1
                continue
            t = (rx * dyj - ry * dxj) / denom
            u = (rx * dyi - ry * dxi) / denom
            if -tol <= t <= 1.0 + tol and -tol <= u <= 1.0 + tol:
                if nhit == cap:
                    cap *= 2
                    hi = np.concatenate((hi, np.empty(cap // 2, dtype=np.int64)))
                    hj = np.concatenate((hj, np.empty(cap // 2, dtype=np.int64)))
                    ht = np.concatenate((ht, np.empty(cap // 2)))
                    hu = np.concatenate((hu, np.empty(cap // 2)))
                hi[nhit] = i
                hj[nhit] = j
                ht[nhit] = min(max(t, 0.0), 1.0)
                hu[nhit] = min(max(u, 0.0), 1.0)
                nhit += 1
    return hi[:nhit], hj[:nhit], ht[:nhit], hu[:nhit], degenerate
