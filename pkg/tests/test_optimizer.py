import numpy as np
import pytest

from martinet_lab.core import PlanarCurve, curve_length, holonomy
from martinet_lab.flow import IntegratorConfig
from martinet_lab.optimizer import (CompetitorProblem, OptimizerConfig,
                                    branch_compare, certify_gap,
                                    direct_minimize, discrete_target,
                                    make_init, shooting_sweep)


@pytest.fixture
def problem(params):
    return CompetitorProblem(params=params, s=0.005, eps=0.1)


@pytest.fixture
def small_cfg():
    return OptimizerConfig(n_nodes=128, max_outer=25, max_inner=500)


def test_problem_validation(params):
    with pytest.raises(ValueError):
        CompetitorProblem(params=params, s=0.0, eps=0.1)
    with pytest.raises(ValueError):
        CompetitorProblem(params=params, s=0.1, eps=-0.1)
    with pytest.warns(UserWarning):
        CompetitorProblem(params=params, s=0.5, eps=0.1)


def test_problem_endpoints_and_mirror(params, problem):
    assert problem.start == (0.0, -0.005)
    assert problem.end[0] == pytest.approx(0.1 ** 2.5, rel=1e-15)
    m = problem.mirror()
    assert m.end[0] == -problem.end[0]
    assert m.holonomy_target == problem.holonomy_target
    assert m.mirror().mirrored is False


def test_make_init_kinds(problem):
    for kind in ("abnormal", "chord", "loop_seeded"):
        c = make_init(problem, kind, 128)
        assert len(c.t) == 128
        assert (c.x1[0], c.x2[0]) == problem.start
        assert c.x1[-1] == pytest.approx(problem.end[0], rel=1e-12)
        assert c.x2[-1] == pytest.approx(problem.end[1], rel=1e-12)
    with pytest.raises(ValueError):
        make_init(problem, "spline", 128)
    with pytest.raises(ValueError):
        make_init(problem, "custom", 128)


def test_make_init_mirrored_noise(problem):
    m = problem.mirror()
    a = make_init(problem, "abnormal", 128, rng=np.random.default_rng(3),
                  perturbation=0.05)
    b = make_init(m, "abnormal", 128, rng=np.random.default_rng(3),
                  perturbation=0.05)
    assert np.array_equal(a.x1, -b.x1)
    assert np.array_equal(a.x2, b.x2)


def test_abnormal_init_is_feasible(problem, small_cfg):
    target = discrete_target(problem, small_cfg.n_nodes)
    ref = make_init(problem, "abnormal", small_cfg.n_nodes)
    assert holonomy(problem.params, ref) == target


def test_direct_minimize_abnormal(problem, small_cfg):
    res = direct_minimize(problem, small_cfg, init="abnormal")
    assert res.converged
    assert abs(res.constraint_residual) < small_cfg.cons_tol
    # never longer than the straight-through reference at this mesh
    assert res.gap < 1e-4
    assert res.beta >= 0.0


def test_chord_init_restores_feasibility(problem, small_cfg):
    target = discrete_target(problem, small_cfg.n_nodes)
    chord = make_init(problem, "chord", small_cfg.n_nodes)
    hol0 = holonomy(problem.params, chord)
    assert abs(hol0 - target) > 1e-13  # infeasible at the start
    res = direct_minimize(problem, small_cfg, init="chord")
    assert abs(res.constraint_residual) < small_cfg.cons_tol
    assert res.length < curve_length(chord) + 0.01


def test_inits_agree(problem, small_cfg):
    la = direct_minimize(problem, small_cfg, init="abnormal").length
    lc = direct_minimize(problem, small_cfg, init="chord").length
    assert la == pytest.approx(lc, abs=1e-6)


def test_merit_history_tracks_length(problem, small_cfg):
    res = direct_minimize(problem, small_cfg, init="abnormal")
    assert len(res.merit_history) >= 2
    # at a feasible point the penalty terms are negligible
    assert res.merit_history[-1] == pytest.approx(res.length, abs=1e-6)


def test_mirror_equivariance(problem, small_cfg):
    a = direct_minimize(problem, small_cfg, init="abnormal", seed=7)
    b = direct_minimize(problem.mirror(), small_cfg, init="abnormal", seed=7)
    assert a.length == b.length
    assert np.array_equal(a.curve.x1, -b.curve.x1)
    assert np.array_equal(a.curve.x2, b.curve.x2)


def test_branch_compare(problem, small_cfg):
    out = branch_compare(problem, small_cfg, seeds=(0,))
    assert len(out["rows"]) == 2
    assert out["max_length_diff"] <= 1e-12


def test_certify_gap_filters_infeasible(problem, small_cfg):
    res = direct_minimize(problem, small_cfg, init="abnormal")
    # a very short but infeasible competitor must not win
    fake = direct_minimize(problem, OptimizerConfig(n_nodes=64, max_outer=1,
                                                    max_inner=1),
                           init="chord")
    assert abs(fake.constraint_residual) > 1e-10
    report = certify_gap(problem, [res, fake], budget={"n_runs": 2})
    assert not report.beaten
    assert "not beaten" in report.verdict
    assert report.best["length"] == res.length
    feas = [c["feasible"] for c in report.candidates]
    assert feas == [True, False]
    j = report.to_json()
    assert "verdict" in j
    with pytest.raises(ValueError):
        certify_gap(problem, [])


def test_certify_gap_beaten_branch(problem, small_cfg):
    res = direct_minimize(problem, small_cfg, init="abnormal")
    res.length = 0.5 * res.length  # synthetic shorter feasible length
    report = certify_gap(problem, [res])
    assert report.beaten
    assert report.verdict.startswith("beaten")


def test_shooting_sweep_lambda_zero(problem):
    sols = shooting_sweep(problem, [0.5 * np.pi * 0.9], [0.0],
                          int_cfg=IntegratorConfig(step=2e-3))
    assert len(sols) == 1
    assert not sols[0].converged


def test_shooting_sweep_validation(problem):
    with pytest.raises(ValueError):
        shooting_sweep(problem, [], [0.0])


def test_optimizer_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(n_nodes=8)
    with pytest.raises(ValueError):
        OptimizerConfig(penalty_growth=0.5)
    with pytest.raises(ValueError):
        OptimizerConfig(grad_tol=0.0)
