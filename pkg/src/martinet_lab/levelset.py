"""Shortest paths constrained to the sublevel region {Ptilde <= zeta, x1 >= 0}.

For small zeta the minimizer from (0, -s) to (eps^q, eps) is a tangent
segment, an arc of the graph x1 = f(x2) = sqrt(x2^b + zeta), and a second
tangent segment.  The two tangency heights y0 < y1 solve scalar equations
with one closed form (start tangency at s = 0) and are otherwise found by
bracketed root solving.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .core import PlanarCurve, eval_Ptilde, gamma_length


@dataclass
class LevelSetGeodesic:
    zeta: float
    y0: float
    y1: float
    m0: float
    m1: float
    s: float
    eps: float


@dataclass
class AsymptoticReport:
    alpha: float
    xi: float
    ratio: float
    y0_over_eps: float


def _f(y, b, zeta):
    return math.sqrt(y ** b + zeta)


def _fprime(y, b, q, zeta):
    return q * y ** (b - 1) / math.sqrt(y ** b + zeta)


def solve_tangency_start(params, s, zeta):
    """Height y0 where the segment from (0, -s) touches the graph.

    Solves (q - 1) y^b + q s y^(b-1) = zeta; closed form for s = 0.
    Returns (y0, m0) with m0 the graph slope dx1/dx2 at y0.
    """
    if zeta <= 0.0:
        raise ValueError("zeta must be positive")
    if s < 0.0:
        raise ValueError("s must be nonnegative")
    b, q = params.b, params.q
    y_free = (zeta / (q - 1.0)) ** (1.0 / b)
    if s == 0.0:
        y0 = y_free
    else:
        # the left side is increasing in y, negative at 0, positive at y_free
        def h(y):
            return (q - 1.0) * y ** b + q * s * y ** (b - 1) - zeta

        y0 = brentq(h, 1e-300, y_free, xtol=1e-300, rtol=8.9e-16)
    m0 = _fprime(y0, b, q, zeta)
    resid = abs(y0 ** b + zeta - q * y0 ** (b - 1) * (y0 + s))
    if resid > 1e-12 * max(zeta, 1.0):
        raise RuntimeError(f"start tangency residual {resid:.3e}")
    return y0, m0


def solve_tangency_end(params, eps, zeta):
    """Height y1 where the segment into (eps^q, eps) touches the graph.

    Solves y^b + zeta = q y^(b-1) (y - eps) + eps^q sqrt(y^b + zeta) for
    the root just below eps.  Returns (y1, m1).
    """
    if zeta <= 0.0:
        raise ValueError("zeta must be positive")
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    b, q = params.b, params.q

    def F(y):
        x = y ** b + zeta
        return x - q * y ** (b - 1) * (y - eps) - eps ** q * math.sqrt(x)

    if F(eps) <= 0.0:
        raise ValueError("no tangency: zeta too large for this eps")
    # scan down from eps for the sign change nearest the endpoint
    alpha = zeta / eps ** b
    xi_guess = math.sqrt(alpha / (b * (q - 1.0) / 2.0))
    y_hi = eps
    found = None
    g = 0.25 * xi_guess
    while g < 1.0:
        y = eps * (1.0 - g)
        if F(y) < 0.0:
            found = y
            break
        y_hi = y
        g *= 2.0
    if found is None:
        raise ValueError("no tangency root below eps (zeta out of regime)")
    y1 = brentq(F, found, y_hi, xtol=1e-300, rtol=8.9e-16)
    m1 = _fprime(y1, b, q, zeta)
    x = y1 ** b + zeta
    resid = abs(x - q * y1 ** (b - 1) * (y1 - eps) - eps ** q * math.sqrt(x))
    if resid > 1e-12 * max(x, 1.0):
        raise RuntimeError(f"end tangency residual {resid:.3e}")
    return y1, m1


def build_nu(params, s, eps, zeta, n_arc=4096):
    """Three-piece sublevel geodesic and its sampled polyline.

    Rejects zeta values for which the straight chord already stays in the
    sublevel region (the construction degenerates to the chord there).
    """
    b, q = params.b, params.q
    chord_t = np.linspace(0.0, 1.0, 1025)
    cx = chord_t * eps ** q
    cy = -s + chord_t * (eps + s)
    if float(np.max(eval_Ptilde(params, cx, cy))) <= zeta:
        raise ValueError("chord lies in the sublevel region: trivial minimizer")
    y0, m0 = solve_tangency_start(params, s, zeta)
    y1, m1 = solve_tangency_end(params, eps, zeta)
    if not y0 < y1:
        raise ValueError(f"tangency order violated: y0={y0:.6g} >= y1={y1:.6g}")
    geo = LevelSetGeodesic(zeta=zeta, y0=y0, y1=y1, m0=m0, m1=m1, s=s, eps=eps)

    ys = np.linspace(y0, y1, n_arc)
    arc_x = np.sqrt(ys ** b + zeta)
    n_seg = 257
    t0 = np.linspace(0.0, 1.0, n_seg)[:-1]
    seg1_x = t0 * arc_x[0]
    seg1_y = -s + t0 * (y0 + s)
    t1 = np.linspace(0.0, 1.0, n_seg)[1:]
    seg2_x = arc_x[-1] + t1 * (eps ** q - arc_x[-1])
    seg2_y = y1 + t1 * (eps - y1)
    x1 = np.concatenate((seg1_x, arc_x, seg2_x))
    x2 = np.concatenate((seg1_y, ys, seg2_y))
    chord = np.hypot(np.diff(x1), np.diff(x2))
    t = np.concatenate(([0.0], np.cumsum(chord)))
    curve = PlanarCurve(t=t, x1=x1, x2=x2, arc_length=True, tol_arc=1e-6)
    return geo, curve


def nu_length(params, geo):
    """Length of the three-piece geodesic (arc by adaptive quadrature)."""
    b, q, zeta = params.b, params.q, geo.zeta
    l1 = math.hypot(_f(geo.y0, b, zeta), geo.y0 + geo.s)
    l3 = math.hypot(geo.eps ** q - _f(geo.y1, b, zeta), geo.eps - geo.y1)
    arc, _ = quad(lambda y: math.sqrt(1.0 + _fprime(y, b, q, zeta) ** 2),
                  geo.y0, geo.y1, epsabs=1e-15, epsrel=1e-13, limit=200)
    return l1 + arc + l3


def nu_length_bound_check(params, s, eps, zeta, k_fit, regime_c=1.0):
    """Length deficit of the sublevel geodesic against the reference curve.

    Valid only in the regime zeta <= regime_c * eps^(3q-1); the deficit is
    compared against k_fit * zeta^(1 - 1/b).
    """
    if zeta > regime_c * eps ** (3.0 * params.q - 1.0):
        raise ValueError("zeta outside the small-level regime")
    geo, _ = build_nu(params, s, eps, zeta)
    l_nu = nu_length(params, geo)
    l_gamma = gamma_length(params, s, eps, mode="quadrature")
    deficit = l_gamma - l_nu
    bound_ok = deficit <= k_fit * zeta ** (1.0 - 1.0 / params.b)
    return l_nu, l_gamma, deficit, bound_ok


def calibrate_k_fit(params, zetas=None, epss=(0.05, 0.1, 0.2), with_shift=True,
                    regime_c=1.0):
    """Empirical constant: 2x the max of deficit / zeta^(1-1/b) on a grid.

    Grid points outside the small-level regime are skipped.  Returns
    (k_fit, rows) where each row records the grid point and its ratio.
    """
    if zetas is None:
        zetas = np.logspace(-12.0, -6.0, 7)
    expo = 1.0 - 1.0 / params.b
    rows = []
    worst = 0.0
    for eps in epss:
        ss = (0.0, eps * eps / 2.0) if with_shift else (0.0,)
        for s in ss:
            for zeta in zetas:
                if zeta > regime_c * eps ** (3.0 * params.q - 1.0):
                    rows.append({"eps": eps, "s": s, "zeta": float(zeta),
                                 "feasible": False, "ratio": math.nan})
                    continue
                geo, _ = build_nu(params, s, eps, zeta)
                deficit = gamma_length(params, s, eps) - nu_length(params, geo)
                ratio = deficit / zeta ** expo
                worst = max(worst, ratio)
                rows.append({"eps": eps, "s": s, "zeta": float(zeta),
                             "feasible": True, "ratio": float(ratio)})
    if worst == 0.0:
        raise RuntimeError("no feasible grid points for the calibration")
    return 2.0 * worst, rows


def asymptotic_report(params, eps, zeta):
    """Scale-free tangency data: alpha = zeta/eps^b, xi = 1 - y1/eps."""
    y1, _ = solve_tangency_end(params, eps, zeta)
    y0, _ = solve_tangency_start(params, 0.0, zeta)
    alpha = zeta / eps ** params.b
    xi = 1.0 - y1 / eps
    if not 0.0 < xi < 1.0:
        raise RuntimeError(f"xi out of range: {xi}")
    return AsymptoticReport(alpha=alpha, xi=xi, ratio=alpha / (xi * xi),
                            y0_over_eps=y0 / eps)


def sweep_rows(params, s, eps, zetas, k_fit=None, regime_c=1.0):
    """Rows for the sweep table: tangency data, lengths, and the deficit."""
    rows = []
    for zeta in zetas:
        row = {"b": params.b, "s": s, "eps": eps, "zeta": float(zeta)}
        try:
            if zeta > regime_c * eps ** (3.0 * params.q - 1.0):
                raise ValueError("zeta outside the small-level regime")
            geo, _ = build_nu(params, s, eps, zeta)
            rep = asymptotic_report(params, eps, zeta)
            l_nu = nu_length(params, geo)
            l_gamma = gamma_length(params, s, eps)
            row.update(y0=geo.y0, y1=geo.y1, alpha=rep.alpha, xi=rep.xi,
                       ratio=rep.ratio, L_nu=l_nu, L_gamma=l_gamma,
                       deficit=l_gamma - l_nu, feasible=True)
        except (ValueError, RuntimeError) as exc:
            row.update(y0=math.nan, y1=math.nan, alpha=math.nan, xi=math.nan,
                       ratio=math.nan, L_nu=math.nan, L_gamma=math.nan,
                       deficit=math.nan, feasible=False, note=str(exc))
        rows.append(row)
    return rows
