"""Planar structure, reference curves, lifts and the scalar constraint.

Everything is expressed through the defining polynomial P = x1^2 - x2^b
with b odd and at least 5, its one-sided variant Ptilde, and the partial
Q = d(P^2)/dx1 = 4 x1 P.  The reference curve runs down the x2-axis for
t < 0 and along the branch x1 = t^q (q = b/2) for t >= 0; its mirror image
flips the sign of x1 on the t >= 0 part.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from . import kernels


@dataclass(frozen=True)
class StructureParams:
    b: int

    def __post_init__(self):
        if self.b < 5 or self.b % 2 == 0:
            raise ValueError(f"b must be odd and >= 5, got {self.b}")

    @property
    def q(self):
        # b odd, so b/2 has a power-of-two denominator: exact as a float
        return self.b / 2


@dataclass
class PlanarCurve:
    t: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    arc_length: bool = False

    tol_arc: float = field(default=1e-8, repr=False)

    def __post_init__(self):
        self.t = np.ascontiguousarray(self.t, dtype=float)
        self.x1 = np.ascontiguousarray(self.x1, dtype=float)
        self.x2 = np.ascontiguousarray(self.x2, dtype=float)
        if not (self.t.shape == self.x1.shape == self.x2.shape):
            raise ValueError("t, x1, x2 must have equal shapes")
        if self.t.ndim != 1 or len(self.t) < 2:
            raise ValueError("curve needs at least 2 samples")
        if not np.all(np.isfinite(self.t)) or not np.all(np.isfinite(self.x1)) \
                or not np.all(np.isfinite(self.x2)):
            raise ValueError("non-finite curve data")
        dt = np.diff(self.t)
        if np.any(dt <= 0.0):
            raise ValueError("t must be strictly increasing")
        if self.arc_length:
            chord = np.hypot(np.diff(self.x1), np.diff(self.x2))
            err = np.max(np.abs(chord - dt) / dt)
            if err > self.tol_arc:
                raise ValueError(
                    f"arc_length flag set but parametrization is off by {err:.3e}")

    def __len__(self):
        return len(self.t)


@dataclass
class HorizontalCurve:
    t: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    x3: np.ndarray

    def __post_init__(self):
        self.t = np.ascontiguousarray(self.t, dtype=float)
        self.x1 = np.ascontiguousarray(self.x1, dtype=float)
        self.x2 = np.ascontiguousarray(self.x2, dtype=float)
        self.x3 = np.ascontiguousarray(self.x3, dtype=float)
        if len(self.t) < 2:
            raise ValueError("curve needs at least 2 samples")


def eval_P(params, x1, x2):
    """P(x) = x1^2 - x2^b; accepts scalars or arrays."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    out = x1 * x1 - x2 ** params.b
    return float(out) if out.ndim == 0 else out


def eval_Ptilde(params, x1, x2):
    """P on the upper half-plane x2 >= 0, x1^2 below it."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    out = np.where(x2 >= 0.0, x1 * x1 - x2 ** params.b, x1 * x1)
    return float(out) if out.ndim == 0 else out


def eval_Q(params, x1, x2):
    """Q(x) = d(P^2)/dx1 = 4 x1 P(x)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    out = 4.0 * x1 * (x1 * x1 - x2 ** params.b)
    return float(out) if out.ndim == 0 else out


def gamma(params, t, mirrored=False):
    """Reference curve point at parameter t (3 coordinates).

    For t < 0 the curve descends the x2-axis with the third coordinate
    t^(2b+1)/(2b+1); for t >= 0 it runs along x1 = t^q at height 0, with
    x1 negated on the mirrored branch.
    """
    b = params.b
    if t < 0.0:
        return (0.0, float(t), float(t) ** (2 * b + 1) / (2 * b + 1))
    x1 = float(t) ** params.q
    return (-x1 if mirrored else x1, float(t), 0.0)


def reference_profile(params, s, eps, n=2049, mirrored=False):
    """Planar projection of the reference curve on [-s, eps], n samples."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if s < 0.0:
        raise ValueError("s must be nonnegative")
    if s == 0.0:
        t = np.linspace(0.0, eps, n)
    else:
        # put a node exactly at the corner t = 0
        ns = max(1, int(round((n - 1) * s / (s + eps))))
        t = np.concatenate((np.linspace(-s, 0.0, ns + 1)[:-1],
                            np.linspace(0.0, eps, n - ns)))
    x1 = np.where(t >= 0.0, np.maximum(t, 0.0) ** params.q, 0.0)
    if mirrored:
        x1 = -x1
    return PlanarCurve(t=t, x1=x1, x2=t.copy())


def resample_arclength(curve, n):
    """Resample a polyline uniformly in chord arc length (n nodes).

    The returned parameter is the chord cumsum of the resampled nodes, so
    the arc-length flag holds exactly even when the source has corners.
    """
    chord = np.hypot(np.diff(curve.x1), np.diff(curve.x2))
    cum = np.concatenate(([0.0], np.cumsum(chord)))
    svals = np.linspace(0.0, cum[-1], n)
    x1 = np.interp(svals, cum, curve.x1)
    x2 = np.interp(svals, cum, curve.x2)
    t = np.concatenate(([0.0], np.cumsum(np.hypot(np.diff(x1), np.diff(x2)))))
    return PlanarCurve(t=t, x1=x1, x2=x2, arc_length=True, tol_arc=1e-6)


def holonomy(params, curve):
    """Trapezoid value of the lift integral int P(w)^2 dw2 over the curve."""
    return kernels.holonomy_trapz(curve.x1, curve.x2, params.b)


def holonomy_running(params, curve):
    """Running lift integral, one value per node (first is 0)."""
    return kernels.holonomy_cumsum(curve.x1, curve.x2, params.b)


def reference_holonomy_target(params, s):
    """Net third-coordinate change a competitor on [-s, eps] must realize.

    Equals s^(2b+1)/(2b+1): the reference curve starts at height
    -s^(2b+1)/(2b+1) and ends at height 0.
    """
    if s < 0.0:
        raise ValueError("s must be nonnegative")
    return float(s) ** (2 * params.b + 1) / (2 * params.b + 1)


def lift(params, curve, z0=0.0):
    """Horizontal lift of a plane curve with initial height z0."""
    x3 = z0 + holonomy_running(params, curve)
    return HorizontalCurve(t=curve.t, x1=curve.x1, x2=curve.x2, x3=x3)


def project(hcurve, arc_length=False):
    """Drop the third coordinate."""
    return PlanarCurve(t=hcurve.t, x1=hcurve.x1, x2=hcurve.x2,
                       arc_length=arc_length)


def curve_length(curve):
    """Chord-sum Euclidean length."""
    return kernels.polyline_length(curve.x1, curve.x2)


def gamma_length(params, s, eps, mode="quadrature"):
    """Length of the reference curve restricted to [-s, eps].

    quadrature: s + integral of sqrt(1 + q^2 t^(2q-2)) over [0, eps]
    to about 1e-12 absolute.  asymptotic: the two-term expansion
    s + eps + q^2/(2(2q-1)) * eps^(2q-1).
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if s < 0.0:
        raise ValueError("s must be nonnegative")
    q = params.q
    if mode == "asymptotic":
        return s + eps + q * q / (2.0 * (2.0 * q - 1.0)) * eps ** (2.0 * q - 1.0)
    if mode != "quadrature":
        raise ValueError(f"unknown mode {mode!r}")
    val, _ = quad(lambda t: np.sqrt(1.0 + q * q * t ** (2.0 * q - 2.0)),
                  0.0, eps, epsabs=1e-15, epsrel=1e-13, limit=200)
    return s + val


def apply_phi(hcurve):
    """The reflection (x1, x2, x3) -> (-x1, x2, x3), an exact isometry."""
    return HorizontalCurve(t=hcurve.t, x1=-hcurve.x1, x2=hcurve.x2,
                           x3=hcurve.x3)


def beta_values(params, curve):
    """(max |P|, max |Ptilde|) over the curve samples."""
    beta = float(np.max(np.abs(eval_P(params, curve.x1, curve.x2))))
    beta_tilde = float(np.max(np.abs(eval_Ptilde(params, curve.x1, curve.x2))))
    return beta, beta_tilde
