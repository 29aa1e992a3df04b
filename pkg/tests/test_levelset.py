import math

import mpmath as mp
import numpy as np
import pytest

from martinet_lab.core import eval_Ptilde, gamma_length
from martinet_lab.levelset import (asymptotic_report, build_nu,
                                   calibrate_k_fit, nu_length,
                                   nu_length_bound_check, solve_tangency_end,
                                   solve_tangency_start, sweep_rows)


def test_tangency_start_closed_form(params):
    y0, m0 = solve_tangency_start(params, 0.0, 1.5e-5)
    assert y0 == pytest.approx(0.1, rel=1e-14)
    y0b, _ = solve_tangency_start(params, 0.0, 1.5e-10)
    assert y0b == pytest.approx(1e-2, rel=1e-13)


def test_tangency_start_with_shift(params):
    zeta = 1.5e-5
    y_free, _ = solve_tangency_start(params, 0.0, zeta)
    y0, m0 = solve_tangency_start(params, 0.05, zeta)
    assert y0 < y_free
    # residual of the tangency equation, rearranged form
    resid = y0 ** 5 + zeta - 2.5 * y0 ** 4 * (y0 + 0.05)
    assert abs(resid) < 1e-12
    assert m0 == pytest.approx(2.5 * y0 ** 4 / math.sqrt(y0 ** 5 + zeta),
                               rel=1e-14)


def test_y0_monotone_decreasing_in_s(params):
    zeta = 1e-9
    prev = math.inf
    for s in (0.0, 0.001, 0.01, 0.05):
        y0, _ = solve_tangency_start(params, s, zeta)
        assert y0 < prev
        prev = y0


def test_tangency_end_asymptotic(params):
    eps = 0.1
    zeta = 3.75e-11
    y1, m1 = solve_tangency_end(params, eps, zeta)
    xi = 1.0 - y1 / eps
    alpha = zeta / eps ** 5
    assert alpha / xi ** 2 == pytest.approx(3.75, rel=0.01)


def test_tangency_end_extended_precision(params):
    # independent 40-digit evaluation of the same equation
    eps, zeta = 0.1, 1e-12
    y1, _ = solve_tangency_end(params, eps, zeta)
    mp.mp.dps = 40
    y = mp.mpf(y1)
    x = y ** 5 + mp.mpf(zeta)
    q = mp.mpf(5) / 2
    resid = x - q * y ** 4 * (y - mp.mpf(eps)) - mp.mpf(eps) ** q * mp.sqrt(x)
    assert abs(float(resid)) < 1e-10


def test_tangency_end_limit(params):
    eps = 0.1
    prev_xi = math.inf
    for zeta in (1e-9, 1e-10, 1e-11, 1e-12):
        y1, _ = solve_tangency_end(params, eps, zeta)
        xi = 1.0 - y1 / eps
        assert 0.0 < xi < prev_xi
        prev_xi = xi


def test_tangency_errors(params):
    with pytest.raises(ValueError):
        solve_tangency_start(params, 0.0, 0.0)
    with pytest.raises(ValueError):
        solve_tangency_end(params, 0.1, 1.0)  # chord-level zeta


def test_build_nu_junctions(params):
    geo, curve = build_nu(params, 0.01, 0.1, 1e-10)
    assert 0.0 < geo.y0 < geo.y1 < 0.1
    # endpoints exact
    assert curve.x1[0] == 0.0 and curve.x2[0] == -0.01
    assert curve.x1[-1] == pytest.approx(0.1 ** 2.5, rel=1e-15)
    assert curve.x2[-1] == 0.1
    # support inside the sublevel region
    excess = np.max(eval_Ptilde(params, curve.x1, curve.x2)) - geo.zeta
    assert excess <= 1e-12
    # slope of the first segment matches the graph slope at y0
    slope = (curve.x1[200] - curve.x1[0]) / (curve.x2[200] - curve.x2[0])
    assert slope == pytest.approx(geo.m0, rel=1e-9)


def test_build_nu_rejects_chord_level(params):
    with pytest.raises(ValueError):
        build_nu(params, 0.01, 0.1, 0.5)


def test_deficit_nonnegative_and_monotone(params):
    prev = -1.0
    for zeta in (1e-12, 1e-11, 1e-10, 1e-9):
        geo, _ = build_nu(params, 0.0, 0.1, zeta)
        deficit = gamma_length(params, 0.0, 0.1) - nu_length(params, geo)
        assert deficit >= prev
        assert deficit >= 0.0
        prev = deficit


def test_nu_length_bound(params):
    k_fit, rows = calibrate_k_fit(params)
    feasible = [r for r in rows if r["feasible"]]
    assert feasible
    l_nu, l_gamma, deficit, ok = nu_length_bound_check(params, 0.0, 0.1,
                                                       1e-10, k_fit)
    assert ok
    assert deficit >= 0.0
    assert l_nu < l_gamma
    with pytest.raises(ValueError):
        nu_length_bound_check(params, 0.0, 0.1, 1.0, k_fit)


def test_k_fit_stability(params):
    _, rows = calibrate_k_fit(params)
    by_slice = {}
    for r in rows:
        if r["feasible"]:
            by_slice.setdefault((r["eps"], r["s"]), []).append(r["ratio"])
    maxima = [max(v) for v in by_slice.values()]
    assert max(maxima) <= 2.0 * min(maxima)


def test_asymptotic_report(params, params7):
    rep = asymptotic_report(params, 0.1, 3.75e-12)
    assert rep.ratio == pytest.approx(3.75, rel=0.02)
    assert rep.y0_over_eps < 0.1
    rep7 = asymptotic_report(params7, 0.3, 8.75e-2 * 0.3 ** 7 * 1e-6)
    assert rep7.ratio == pytest.approx(8.75, rel=0.02)


def test_sweep_rows(params):
    zetas = [1e-12, 1e-10, 1e-3]
    rows = sweep_rows(params, 0.0, 0.1, zetas)
    assert rows[0]["feasible"] and rows[1]["feasible"]
    assert not rows[2]["feasible"]
    assert rows[0]["deficit"] >= 0.0
    assert rows[1]["ratio"] == pytest.approx(3.75, rel=0.05)
