import math

import numpy as np
import pytest

from martinet_lab.core import PlanarCurve, reference_profile
from martinet_lab.flow import IntegratorConfig, integrate_extremal
from martinet_lab.geometry import (ClosedCurve, Loop, detect_loops,
                                   first_simple_loop, loop_stats,
                                   partition_to_json, rado_check,
                                   sign_partition, total_turning,
                                   weighted_area_line, weighted_area_region,
                                   winding_number)

from conftest import circle, unit_square


def test_winding_circle(params):
    c = ClosedCurve(circle((0.0, 0.0), 1.0, n=256))
    assert winding_number(c, (0.0, 0.0)) == 1
    assert winding_number(c, (2.0, 0.0)) == 0
    cw = ClosedCurve(circle((0.0, 0.0), 1.0, n=256, ccw=False))
    assert winding_number(cw, (0.0, 0.0)) == -1
    with pytest.raises(ValueError):
        winding_number(c, (1.0, 0.0))


def test_winding_refinement_invariant(params):
    for n in (64, 128, 256):
        c = ClosedCurve(circle((0.3, 0.1), 0.5, n=n))
        assert winding_number(c, (0.3, 0.1)) == 1


def test_unit_square_line_area(params):
    # closed form: int_0^1 (1 - y^5)^2 dy - int_0^1 y^10 dy = 2/3
    sq = ClosedCurve(unit_square(n_per_side=16384))
    assert weighted_area_line(params, sq) == pytest.approx(2.0 / 3.0,
                                                           abs=1e-8)


def test_area_reversal_antisymmetry(params):
    c = circle((0.5, 0.2), 0.3, n=128)
    fwd = ClosedCurve(c)
    rev = ClosedCurve(PlanarCurve(t=c.t, x1=c.x1[::-1], x2=c.x2[::-1]))
    a = weighted_area_line(params, fwd)
    b = weighted_area_line(params, rev)
    assert b == pytest.approx(-a, rel=1e-12)


def test_out_and_back_cancels(params):
    t = np.linspace(0.0, 1.0, 101)
    x1 = np.concatenate((t, t[::-1][1:]))
    x2 = np.concatenate((t ** 2, t[::-1][1:] ** 2))
    c = ClosedCurve(PlanarCurve(t=np.arange(len(x1), dtype=float),
                                x1=x1, x2=x2))
    assert weighted_area_line(params, c) == pytest.approx(0.0, abs=1e-15)


def test_rectangle_area_expansion(params):
    # oracle (40-digit quadrature of the two vertical edges):
    # 4.329344649455860e-20 for eps=0.1, alpha=1e-5
    eps, alpha = 0.1, 1e-5
    x_lo = eps ** 2.5
    n = 1024
    u = np.linspace(0.0, 1.0, n + 1)
    x1 = np.concatenate((x_lo + alpha * u, np.full(n, x_lo + alpha),
                         x_lo + alpha * u[::-1][1:], np.full(n, x_lo)))
    x2 = np.concatenate((np.full(n + 1, eps - alpha),
                         eps - alpha + alpha * u[1:],
                         np.full(n, eps), eps - alpha * u[1:]))
    rect = ClosedCurve(PlanarCurve(t=np.arange(len(x1), dtype=float),
                                   x1=x1, x2=x2))
    a = weighted_area_line(params, rect)
    assert abs(a) == pytest.approx(4.329344649455860e-20, rel=1e-5)
    lead = 4.0 * alpha ** 3 * eps ** 5
    assert abs(abs(a) / lead - 1.0) < 0.1


def test_region_form_matches_line_form(params):
    sq = ClosedCurve(unit_square(n_per_side=1024))
    a_line = weighted_area_line(params, sq)
    errs = []
    for grid_n in (128, 256, 512):
        errs.append(abs(weighted_area_region(params, sq, grid_n) - a_line))
    assert errs[-1] < 2e-3
    assert errs[2] < errs[0]


def test_region_form_degenerate(params):
    c = ClosedCurve(circle((0.2, 0.2), 1e-12, n=64), tol_close=1e-10)
    assert abs(weighted_area_region(params, c, 64)) < 1e-12


def test_figure_eight_cancellation(params):
    # second lobe is the first one reflected in x1 and time-reversed, so
    # the two weighted areas cancel exactly (P^2 is even in x1)
    n = 256
    ang = np.linspace(0.0, 2.0 * math.pi, n + 1)
    lobe1x = 0.5 + 0.5 * np.cos(ang - math.pi)
    lobe1y = 0.5 * np.sin(ang - math.pi)
    lobe2x = -lobe1x[::-1]
    lobe2y = lobe1y[::-1]
    x1 = np.concatenate((lobe1x, lobe2x[1:]))
    x2 = np.concatenate((lobe1y, lobe2y[1:]))
    c = ClosedCurve(PlanarCurve(t=np.arange(len(x1), dtype=float),
                                x1=x1, x2=x2))
    a_line = weighted_area_line(params, c)
    a_reg = weighted_area_region(params, c, 256)
    assert abs(a_line) < 1e-15
    assert abs(a_reg - a_line) < 5e-3


def test_rado_cases(params):
    sq = ClosedCurve(unit_square(n_per_side=256))
    lhs, rhs, ok = rado_check(params, sq)
    assert ok
    assert lhs == pytest.approx(2.0 / 3.0, abs=1e-4)
    # sup |Q| over [0,1]^2 is 4 at (1, 0)
    assert rhs == pytest.approx(16.0 / (4.0 * math.pi) * 4.0, rel=1e-2)
    for r in (0.1, 0.01, 0.001):
        c = ClosedCurve(circle((1.0, 0.0), r, n=128))
        lhs, rhs, ok = rado_check(params, c)
        assert ok


def test_rado_on_many_random_curves(params):
    rng = np.random.default_rng(21)
    count = 0
    for _ in range(200):
        cx, cy = rng.uniform(-1.0, 1.0, 2)
        n = int(rng.integers(32, 128))
        ang = np.linspace(0.0, 2.0 * math.pi, n + 1)
        radii = rng.uniform(0.05, 0.5) * (1.0 + 0.3 * np.sin(
            rng.integers(1, 5) * ang + rng.uniform(0, math.pi)))
        x1 = cx + radii * np.cos(ang)
        x2 = cy + radii * np.sin(ang)
        x1[-1], x2[-1] = x1[0], x2[0]
        c = ClosedCurve(PlanarCurve(t=np.arange(n + 1, dtype=float),
                                    x1=x1, x2=x2))
        _, _, ok = rado_check(params, c, sup_grid=128)
        assert ok
        count += 1
    assert count == 200


def test_total_turning_polygons():
    tri = ClosedCurve(PlanarCurve(t=np.arange(4.0),
                                  x1=np.array([0.0, 1.0, 0.0, 0.0]),
                                  x2=np.array([0.0, 0.0, 1.0, 0.0])))
    assert total_turning(tri) == pytest.approx(2.0 * math.pi, abs=1e-12)
    sq = ClosedCurve(PlanarCurve(t=np.arange(5.0),
                                 x1=np.array([0.0, 0.0, 1.0, 1.0, 0.0]),
                                 x2=np.array([0.0, 1.0, 1.0, 0.0, 0.0])))
    assert total_turning(sq) == pytest.approx(-2.0 * math.pi, abs=1e-12)


def test_total_turning_cusp_rejected():
    spike = ClosedCurve(PlanarCurve(t=np.arange(4.0),
                                    x1=np.array([0.0, 1.0, 0.0, 0.0]),
                                    x2=np.array([0.0, 0.0, 0.0, 0.0])),
                        tol_close=1e-9)
    with pytest.raises(ValueError):
        total_turning(spike)


def test_total_turning_trace_orientation(params):
    tr = integrate_extremal(params, (0.5, 0.0), 0.5 * math.pi, 4.0, 2.0,
                            IntegratorConfig(step=1e-4))
    assert total_turning(tr) == pytest.approx(
        tr.theta[-1] - tr.theta[0], abs=1e-15)


def _brute_force_intersections(x, y, closed):
    """Independent all-pairs oracle, straight from the line-line formula."""
    m = len(x) - 1
    hits = []
    for i in range(m):
        for j in range(i + 2, m):
            if closed and i == 0 and j == m - 1:
                continue
            d = ((x[i + 1] - x[i]) * (y[j + 1] - y[j])
                 - (y[i + 1] - y[i]) * (x[j + 1] - x[j]))
            if d == 0.0:
                continue
            t = ((x[j] - x[i]) * (y[j + 1] - y[j])
                 - (y[j] - y[i]) * (x[j + 1] - x[j])) / d
            u = ((x[j] - x[i]) * (y[i + 1] - y[i])
                 - (y[j] - y[i]) * (x[i + 1] - x[i])) / d
            if -1e-12 <= t <= 1.0 + 1e-12 and -1e-12 <= u <= 1.0 + 1e-12:
                hits.append((i, j))
    return sorted(hits)


def test_detect_loops_square_open():
    c = PlanarCurve(t=np.arange(4.0),
                    x1=np.array([0.0, 1.0, 1.0, 0.0]),
                    x2=np.array([0.0, 0.0, 1.0, 1.0]))
    assert detect_loops(c) == []


def test_detect_loops_figure_eight():
    # open sampling (no node exactly at the crossing): one crossing,
    # reported as the loop and its complement since the curve is closed
    n = 256
    t = 2.0 * math.pi * (np.arange(n + 1) + 0.31) / n
    x1 = np.sin(2.0 * t)
    x2 = np.sin(t)
    x1[-1], x2[-1] = x1[0], x2[0]
    c = PlanarCurve(t=t, x1=x1, x2=x2)
    loops = detect_loops(c)
    assert len(loops) == 2
    for lp in loops:
        assert lp.closure_point[0] == pytest.approx(0.0, abs=1e-2)
        assert lp.closure_point[1] == pytest.approx(0.0, abs=1e-2)
    assert loops[1].s_plus > t[-1]  # the complement wraps


def test_detect_loops_transversal_crossing():
    # hook-shaped curve crossing itself once
    t = np.linspace(0.0, 1.0, 400)
    x1 = np.cos(4.0 * t) * (1.0 - t)
    x2 = np.sin(4.0 * t) * (1.0 - t) + 0.5 * t
    c = PlanarCurve(t=t, x1=x1, x2=x2)
    loops = detect_loops(c)
    oracle = _brute_force_intersections(x1, x2, False)
    assert len(loops) == len(oracle)


def test_detect_loops_matches_oracle(params):
    rng = np.random.default_rng(31)
    for trial in range(10):
        n = int(rng.integers(100, 400))
        x1 = np.cumsum(rng.standard_normal(n)) / math.sqrt(n)
        x2 = np.cumsum(rng.standard_normal(n)) / math.sqrt(n)
        c = PlanarCurve(t=np.arange(n, dtype=float), x1=x1, x2=x2)
        loops = detect_loops(c)
        oracle = _brute_force_intersections(x1, x2, False)
        found = sorted((int(lp.s_minus), int(lp.s_plus)) for lp in loops)
        assert found == oracle


def test_first_simple_loop_order():
    loops = [Loop(2.0, 5.0, (0, 0)), Loop(1.0, 3.0, (0, 0))]
    loops.sort(key=lambda l: (l.s_plus, l.s_minus))
    assert first_simple_loop(loops).s_plus == 3.0
    assert first_simple_loop([]) is None


def test_loop_stats(params):
    # circular loop far from the zero set: beta ~ max |P| on the circle
    cc = circle((1.0, 0.0), 0.1, n=256, phase=math.pi)
    curve = PlanarCurve(t=np.arange(len(cc.t), dtype=float),
                        x1=cc.x1, x2=cc.x2)
    lp = Loop(s_minus=0.25, s_plus=float(len(cc.t)) - 1.25,
              closure_point=(float(cc.x1[0]), float(cc.x2[0])))
    st = loop_stats(params, curve, lp)
    # grid-max oracle: max of |x1^2 - x2^5| on the circle is at (1.1, 0)
    assert st.beta_l == pytest.approx(1.1 ** 2, rel=0.02)
    assert st.delta_l == pytest.approx(st.beta_l / st.x_l, rel=1e-12)
    assert st.length == pytest.approx(2.0 * math.pi * 0.1, rel=0.05)


def test_loop_stats_on_zero_set(params):
    t = np.linspace(0.0, 0.2, 100)
    x1 = np.concatenate((t ** 2.5, t[::-1][1:] ** 2.5))
    x2 = np.concatenate((t, t[::-1][1:]))
    curve = PlanarCurve(t=np.arange(len(x1), dtype=float), x1=x1, x2=x2)
    lp = Loop(s_minus=10.0, s_plus=150.0,
              closure_point=(float(x1[10]), float(x2[10])))
    st = loop_stats(params, curve, lp)
    assert st.beta_l == pytest.approx(0.0, abs=1e-16)
    assert st.delta_l == pytest.approx(0.0, abs=1e-16)


def test_sign_partition_cases(params):
    prof = reference_profile(params, 0.1, 0.1, n=500)
    part = sign_partition(params, prof)
    assert part.degenerate
    t = np.linspace(0.0, 1.0, 200)
    c = PlanarCurve(t=t, x1=0.2 + 0.0 * t, x2=-0.5 + 1.5 * t)
    part2 = sign_partition(params, c)
    # Ptilde = x1^2 below the axis, then P crosses zero where x2^5 = x1^2,
    # i.e. at x2 = 0.04^(1/5) ~ 0.525
    assert len(part2.taus) == 1
    assert part2.interval_signs == [1, -1]
    x2_cross = -0.5 + 1.5 * part2.taus[0]
    assert x2_cross == pytest.approx(0.04 ** 0.2, abs=1e-2)
    below = PlanarCurve(t=t, x1=0.3 + 0.0 * t, x2=-1.0 + 0.5 * t)
    part3 = sign_partition(params, below)
    assert len(part3.taus) == 0
    assert part3.interval_signs == [1]


def test_partition_json(params):
    t = np.linspace(0.0, 1.0, 200)
    c = PlanarCurve(t=t, x1=0.2 + 0.0 * t, x2=-0.5 + 1.5 * t)
    part = sign_partition(params, c)
    out = partition_to_json([Loop(0.1, 0.5, (0.0, 0.0))], part)
    assert '"s_minus": 0.1' in out
    assert '"signs": ["+", "-"]' in out


def test_closed_curve_validation():
    c = circle((0.0, 0.0), 1.0, n=64)
    ClosedCurve(c)
    open_c = PlanarCurve(t=np.arange(3.0), x1=np.array([0.0, 1.0, 2.0]),
                         x2=np.zeros(3))
    with pytest.raises(ValueError):
        ClosedCurve(open_c)
