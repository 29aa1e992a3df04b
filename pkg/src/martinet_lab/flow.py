"""Normal extremal integration and endpoint shooting.

Two equivalent formulations are implemented: the arc-length angle form
(x1' = cos th, x2' = sin th, th' = lam * Q) and the full 5-dimensional
covector system with Hamiltonian H = (p1^2 + (p2 + P^2 p3)^2) / 2.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import kernels
from .core import PlanarCurve, eval_P, eval_Q, holonomy, reference_holonomy_target


@dataclass
class IntegratorConfig:
    step: float = 1e-3
    method: str = "rk4"
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10

    def __post_init__(self):
        if self.step <= 0.0 or self.abs_tol <= 0.0 or self.rel_tol <= 0.0:
            raise ValueError("step and tolerances must be positive")
        if self.method not in ("rk4", "rk45"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class ExtremalTrace:
    curve: PlanarCurve
    theta: np.ndarray
    lam: float


@dataclass
class HamiltonianState:
    p1: float
    p2: float
    p3: float
    x1: float
    x2: float

    def as_array(self):
        return np.array([self.p1, self.p2, self.p3, self.x1, self.x2])


@dataclass
class ShootingSolution:
    theta0: float
    lam: float
    T: float
    endpoint_residual: np.ndarray
    holonomy_residual: float
    trace: ExtremalTrace
    converged: bool
    iterations: int = 0


def _n_steps(T, step):
    return max(1, int(math.ceil(T / step - 1e-12)))


def integrate_extremal(params, start, theta0, lam, T, cfg=None):
    """Arc-length trace of length T from `start` with initial angle theta0."""
    if T <= 0.0:
        raise ValueError("T must be positive")
    cfg = cfg or IntegratorConfig()
    x10, x20 = float(start[0]), float(start[1])
    if cfg.method == "rk4":
        n = _n_steps(T, cfg.step)
        h = T / n
        xs, ys, ths = kernels.rk4_angle(x10, x20, float(theta0), float(lam),
                                        params.b, h, n)
        t = np.linspace(0.0, T, n + 1)
    else:
        b = params.b

        def rhs(_, y):
            return [np.cos(y[2]), np.sin(y[2]),
                    lam * 4.0 * y[0] * (y[0] * y[0] - y[1] ** b)]

        n = _n_steps(T, cfg.step)
        t = np.linspace(0.0, T, n + 1)
        sol = solve_ivp(rhs, (0.0, T), [x10, x20, float(theta0)],
                        t_eval=t, rtol=cfg.rel_tol, atol=cfg.abs_tol,
                        method="RK45")
        if not sol.success:
            raise RuntimeError(f"rk45 failed at t={sol.t[-1]:.6g}: {sol.message}")
        xs, ys, ths = sol.y
    # chord length trails arc length by ~(step * turning rate)^2 / 24;
    # under-resolved traces (stiff lambda) can deviate much more, so the
    # flag is granted from the measured deviation, not a model of it
    dth = float(np.max(np.abs(np.diff(ths)))) if len(ths) > 1 else 0.0
    tol = max(1e-8, (T / len(t)) ** 2, 3.0 * dth * dth)
    chord = np.hypot(np.diff(xs), np.diff(ys))
    rel = float(np.max(np.abs(chord - np.diff(t)) / np.diff(t)))
    curve = PlanarCurve(t=t, x1=xs, x2=ys,
                        arc_length=dth <= 0.5 and rel <= tol, tol_arc=tol)
    return ExtremalTrace(curve=curve, theta=np.asarray(ths, dtype=float),
                         lam=float(lam))


def integrate_hamiltonian(params, state0, T, cfg=None):
    """Trace of the covector system; returns ((n+1, 5) array, PlanarCurve)."""
    if T <= 0.0:
        raise ValueError("T must be positive")
    if hamiltonian(params, state0) <= 0.0:
        raise ValueError("initial Hamiltonian must be positive")
    cfg = cfg or IntegratorConfig()
    s0 = state0.as_array()
    if cfg.method == "rk4":
        n = _n_steps(T, cfg.step)
        h = T / n
        states = kernels.rk4_hamiltonian(s0[0], s0[1], s0[2], s0[3], s0[4],
                                         params.b, h, n)
        t = np.linspace(0.0, T, n + 1)
    else:
        b = params.b

        def rhs(_, y):
            p1, p2, p3, x1, x2 = y
            p = x1 * x1 - x2 ** b
            h2 = p2 + p * p * p3
            return [-4.0 * x1 * p * h2 * p3,
                    2.0 * b * x2 ** (b - 1) * p * h2 * p3,
                    0.0, p1, h2]

        n = _n_steps(T, cfg.step)
        t = np.linspace(0.0, T, n + 1)
        sol = solve_ivp(rhs, (0.0, T), s0, t_eval=t, rtol=cfg.rel_tol,
                        atol=cfg.abs_tol, method="RK45")
        if not sol.success:
            raise RuntimeError(f"rk45 failed at t={sol.t[-1]:.6g}: {sol.message}")
        states = sol.y.T
    curve = PlanarCurve(t=t, x1=states[:, 3], x2=states[:, 4])
    return states, curve


def hamiltonian(params, state):
    """H = (p1^2 + (p2 + P(x)^2 p3)^2) / 2."""
    p = eval_P(params, state.x1, state.x2)
    h2 = state.p2 + p * p * state.p3
    return 0.5 * (state.p1 * state.p1 + h2 * h2)


def hamiltonian_values(params, states):
    """H along an (n, 5) state array."""
    p = eval_P(params, states[:, 3], states[:, 4])
    h2 = states[:, 1] + p * p * states[:, 2]
    return 0.5 * (states[:, 0] ** 2 + h2 * h2)


def angle_initial_state(params, start, theta0, lam):
    """Covector matching an angle-form start; gauge fixes H = 1/2."""
    p = eval_P(params, start[0], start[1])
    return HamiltonianState(p1=math.cos(theta0),
                            p2=math.sin(theta0) - p * p * lam,
                            p3=lam, x1=float(start[0]), x2=float(start[1]))


def curvature_residual(params, trace):
    """Max interior gap between the differenced turning rate and lam * Q."""
    t = trace.curve.t
    if len(t) < 3:
        raise ValueError("need at least 3 nodes")
    th = trace.theta
    rate = (th[2:] - th[:-2]) / (t[2:] - t[:-2])
    qvals = eval_Q(params, trace.curve.x1[1:-1], trace.curve.x2[1:-1])
    return float(np.max(np.abs(rate - trace.lam * qvals)))


def shoot(params, s, eps, guess, cfg=None, target=None,
          shoot_tol=1e-10, max_iter=60, mirrored=False, end=None):
    """Damped Newton on (x1(T) - end1, x2(T) - eps, holonomy - target).

    The trajectory starts at (0, -s); the endpoint is (eps^q, eps), with
    x1 negated when `mirrored`.  Unknowns are (theta0, lam, T).  Returns
    the best iterate with its residuals; `converged` reflects whether the
    residual norm dropped below shoot_tol.

    The holonomy component is rescaled internally by the natural problem
    scale eps^(2b+1)/(2b+1): raw holonomy values are many orders below the
    endpoint coordinates, and an unscaled norm would accept solutions whose
    lift misses the target by the full constraint scale.  Reported
    residuals are raw.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    cfg = cfg or IntegratorConfig()
    if target is None:
        target = reference_holonomy_target(params, s)
    hol_scale = abs(target) + eps ** (2 * params.b + 1) / (2 * params.b + 1)
    if end is None:
        end = ((-1.0 if mirrored else 1.0) * eps ** params.q, eps)
    start = (0.0, -s)

    def residual(v):
        th0, lam, T = v
        if T <= 0.0:
            return None, None
        tr = integrate_extremal(params, start, th0, lam, T, cfg)
        r = np.array([tr.curve.x1[-1] - end[0],
                      tr.curve.x2[-1] - end[1],
                      (holonomy(params, tr.curve) - target) / hol_scale])
        return r, tr

    v = np.array([float(guess[0]), float(guess[1]), float(guess[2])])
    r, tr = residual(v)
    if r is None:
        raise ValueError("guess T must be positive")
    best_v, best_r, best_tr = v.copy(), r.copy(), tr
    it = 0
    for it in range(1, max_iter + 1):
        if np.linalg.norm(best_r) < shoot_tol:
            break
        jac = np.empty((3, 3))
        for k in range(3):
            dv = 1e-7 * (1.0 + abs(v[k]))
            vp = v.copy()
            vp[k] += dv
            rp, _ = residual(vp)
            if rp is None:
                vp[k] = v[k] - dv
                rp, _ = residual(vp)
                dv = -dv
            jac[:, k] = (rp - r) / dv
        try:
            delta = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            break
        # damping: halve the step while the residual norm does not improve
        alpha = 1.0
        improved = False
        for _ in range(20):
            rnew, trnew = residual(v + alpha * delta)
            if rnew is not None and np.linalg.norm(rnew) < np.linalg.norm(r):
                improved = True
                break
            alpha *= 0.5
        if not improved:
            break
        v = v + alpha * delta
        r, tr = rnew, trnew
        if np.linalg.norm(r) < np.linalg.norm(best_r):
            best_v, best_r, best_tr = v.copy(), r.copy(), tr
    return ShootingSolution(theta0=float(best_v[0]), lam=float(best_v[1]),
                            T=float(best_v[2]),
                            endpoint_residual=best_r[:2].copy(),
                            holonomy_residual=float(best_r[2] * hol_scale),
                            trace=best_tr,
                            converged=bool(np.linalg.norm(best_r) < shoot_tol),
                            iterations=it)
