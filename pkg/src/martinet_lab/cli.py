"""Command-line front end.

Subcommands: gamma, levelset, minimize, shoot, geometry, verify, branch.
Every run that writes files also writes a manifest.json listing them.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import geometry as geom
from . import io as lio
from . import levelset as lvl
from . import optimizer as opt
from .core import (StructureParams, gamma_length, holonomy,
                   reference_holonomy_target)
from .flow import (IntegratorConfig, HamiltonianState, curvature_residual,
                   hamiltonian_values, integrate_extremal,
                   integrate_hamiltonian, shoot)
from .kernels import backend_name


def _apply_thread_cap():
    cap = os.environ.get("LAB_THREADS")
    if cap:
        try:
            import numba
            numba.set_num_threads(max(1, int(cap)))
        except (ImportError, ValueError):
            pass


def _fail_usage(msg):
    print(f"error: {msg}", file=sys.stderr)
    return 2


def _load_config(path):
    known = {"b", "eps_grid", "s_grid", "zeta_grid", "optimizer", "out"}
    with open(path) as fh:
        cfg = json.load(fh)
    unknown = set(cfg) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def _out_dir(args):
    if args.out:
        os.makedirs(args.out, exist_ok=True)
    return args.out


def cmd_gamma(args):
    if args.eps <= 0.0 or args.s < 0.0:
        return _fail_usage("need eps > 0 and s >= 0")
    params = StructureParams(b=args.b)
    q = params.q
    eps_list = [args.eps] if not args.sweep else [0.2, 0.1, 0.05, 0.02]
    rows = []
    for eps in eps_list:
        lq = gamma_length(params, args.s, eps, mode="quadrature")
        la = gamma_length(params, args.s, eps, mode="asymptotic")
        rem = lq - args.s - eps
        rows.append({"b": args.b, "s": args.s, "eps": eps,
                     "quadrature": lq, "asymptotic": la,
                     "remainder": rem,
                     "remainder_norm": rem / eps ** (2.0 * q - 1.0)})
    cols = ["b", "s", "eps", "quadrature", "asymptotic", "remainder",
            "remainder_norm"]
    print(",".join(cols))
    for r in rows:
        print(",".join(lio.fmt(r[c]) if isinstance(r[c], float) else str(r[c])
                       for c in cols))
    out = _out_dir(args)
    if out:
        path = os.path.join(out, "result.csv")
        lio.write_table_csv(rows, cols, path)
        man = lio.RunManifest("gamma", {"b": args.b, "s": args.s,
                                        "eps": args.eps, "sweep": args.sweep},
                              rng_seed=args.seed)
        man.add_output("result.csv")
        man.write(out)
    return 0


def cmd_levelset(args):
    if args.eps <= 0.0 or args.s < 0.0 or args.zeta_count < 1:
        return _fail_usage("need eps > 0, s >= 0 and a nonempty zeta grid")
    params = StructureParams(b=args.b)
    zetas = np.logspace(math.log10(args.zeta_min), math.log10(args.zeta_max),
                        args.zeta_count)
    rows = lvl.sweep_rows(params, args.s, args.eps, zetas)
    k_fit, _ = lvl.calibrate_k_fit(params)
    target = params.b * (params.q - 1.0) / 2.0
    feas = [r for r in rows if r["feasible"]]
    max_dev = max((abs(r["ratio"] / target - 1.0) for r in feas),
                  default=math.nan)
    cols = ["b", "s", "eps", "zeta", "y0", "y1", "alpha", "xi", "ratio",
            "L_nu", "L_gamma", "deficit", "feasible"]
    print(",".join(cols))
    for r in rows:
        print(",".join(lio.fmt(r[c]) if isinstance(r[c], float) else str(r[c])
                       for c in cols))
    print(f"K_fit={lio.fmt(k_fit)} max_ratio_deviation={lio.fmt(max_dev)}")
    out = _out_dir(args)
    if out:
        lio.write_table_csv(rows, cols, os.path.join(out, "result.csv"))
        man = lio.RunManifest("levelset",
                              {"b": args.b, "s": args.s, "eps": args.eps,
                               "zeta_min": args.zeta_min,
                               "zeta_max": args.zeta_max,
                               "zeta_count": args.zeta_count,
                               "K_fit": k_fit}, rng_seed=args.seed)
        man.add_output("result.csv")
        man.write(out)
    return 0


def cmd_minimize(args):
    if args.s <= 0.0 or args.eps <= 0.0 or args.seeds < 1:
        return _fail_usage("need s > 0, eps > 0, seeds >= 1")
    params = StructureParams(b=args.b)
    problem = opt.CompetitorProblem(params=params, s=args.s, eps=args.eps,
                                    mirrored=args.mirror)
    cfg = opt.OptimizerConfig(n_nodes=args.nodes, rng_seed=args.seed)
    inits = ("abnormal", "chord", "loop_seeded")
    results = []
    for k in range(args.seeds):
        init = inits[k % len(inits)]
        seed = 0 if k < len(inits) else k
        results.append(opt.direct_minimize(problem, cfg, init=init, seed=seed))
    if args.sweep_n > 0:
        th_grid = np.linspace(0.1, 0.5 * math.pi - 0.1, args.sweep_n)
        lam_grid = np.concatenate((-np.logspace(0.0, 3.0, args.sweep_n // 2),
                                   np.logspace(0.0, 3.0,
                                               args.sweep_n - args.sweep_n // 2)))
        results.extend(opt.shooting_sweep(problem, th_grid, lam_grid))
    budget = {"seeds": args.seeds, "n_nodes": args.nodes,
              "sweep": f"{args.sweep_n}x{args.sweep_n}",
              "backend": backend_name()}
    report = opt.certify_gap(problem, results, tol_cert=args.tol,
                             budget=budget)
    if args.seeds < 8:
        report.budget["low_budget"] = True
    print(report.verdict)
    print(f"best={report.best}")
    out = _out_dir(args)
    if out:
        rpath = os.path.join(out, "result.json")
        with open(rpath, "w") as fh:
            fh.write(report.to_json())
        man = lio.RunManifest("minimize",
                              {"b": args.b, "s": args.s, "eps": args.eps,
                               "nodes": args.nodes, "seeds": args.seeds,
                               "mirror": args.mirror}, rng_seed=args.seed)
        man.add_output("result.json")
        os.makedirs(os.path.join(out, "curves"), exist_ok=True)
        for i, r in enumerate(results):
            if isinstance(r, opt.OptResult):
                cpath = os.path.join(out, "curves", f"direct_{i:03d}.json")
                with open(cpath, "w") as fh:
                    fh.write(lio.curve_to_json(params, r.curve))
                man.add_output(os.path.join("curves", f"direct_{i:03d}.json"))
        man.write(out)
    return 3 if report.beaten else 0


def cmd_shoot(args):
    if args.eps <= 0.0 or args.s < 0.0 or args.T <= 0.0:
        return _fail_usage("need eps > 0, s >= 0, T > 0")
    params = StructureParams(b=args.b)
    sol = shoot(params, args.s, args.eps, (args.theta0, args.lam, args.T))
    print(f"converged={sol.converged} iterations={sol.iterations}")
    print(f"theta0={lio.fmt(sol.theta0)} lambda={lio.fmt(sol.lam)} "
          f"T={lio.fmt(sol.T)}")
    print(f"endpoint_residual=({lio.fmt(sol.endpoint_residual[0])}, "
          f"{lio.fmt(sol.endpoint_residual[1])}) "
          f"holonomy_residual={lio.fmt(sol.holonomy_residual)}")
    out = _out_dir(args)
    if out:
        with open(os.path.join(out, "result.json"), "w") as fh:
            fh.write(lio.curve_to_json(params, sol.trace.curve,
                                       theta=sol.trace.theta,
                                       lam=sol.trace.lam))
        man = lio.RunManifest("shoot", {"b": args.b, "s": args.s,
                                        "eps": args.eps}, rng_seed=args.seed)
        man.add_output("result.json")
        man.write(out)
    return 0


def cmd_geometry(args):
    if not os.path.exists(args.curve):
        return _fail_usage(f"no such curve file: {args.curve}")
    with open(args.curve) as fh:
        params, curve = lio.curve_from_json(fh.read())
    loops = geom.detect_loops(curve)
    print(f"nodes={len(curve)} loops={len(loops)}")
    gap = math.hypot(curve.x1[-1] - curve.x1[0], curve.x2[-1] - curve.x2[0])
    if gap <= 1e-10:
        closed = geom.ClosedCurve(curve)
        a_line = geom.weighted_area_line(params, closed)
        a_region = geom.weighted_area_region(params, closed, grid_n=256)
        lhs, rhs, ok = geom.rado_check(params, closed)
        print(f"weighted_area_line={lio.fmt(a_line)}")
        print(f"weighted_area_region={lio.fmt(a_region)}")
        print(f"rado lhs={lio.fmt(lhs)} rhs={lio.fmt(rhs)} ok={ok}")
    part = geom.sign_partition(params, curve)
    print(f"sign_partition taus={len(part.taus)} degenerate={part.degenerate}")
    return 0


def cmd_branch(args):
    if args.s <= 0.0 or args.eps <= 0.0:
        return _fail_usage("need s > 0 and eps > 0")
    params = StructureParams(b=args.b)
    problem = opt.CompetitorProblem(params=params, s=args.s, eps=args.eps)
    cfg = opt.OptimizerConfig(n_nodes=args.nodes)
    report = opt.branch_compare(problem, cfg)
    for r in report["rows"]:
        print(f"init={r['init']} seed={r['seed']} "
              f"length={lio.fmt(r['length'])} "
              f"mirrored={lio.fmt(r['length_mirrored'])} "
              f"diff={lio.fmt(r['diff'])}")
    ok = report["max_length_diff"] <= 1e-12
    print(f"max_length_diff={lio.fmt(report['max_length_diff'])} ok={ok}")
    return 0 if ok else 1


def _check(name, ok, margin, lines):
    lines.append(f"{'PASS' if ok else 'FAIL'} {name} margin={margin:.3e}")
    return ok


def _verify_geometry(lines):
    params = StructureParams(b=5)
    ok = True
    t = np.linspace(0.0, 4.0, 4097)
    x1 = np.where(t < 1.0, t, np.where(t < 2.0, 1.0,
                  np.where(t < 3.0, 3.0 - t, 0.0)))
    x2 = np.where(t < 1.0, 0.0, np.where(t < 2.0, t - 1.0,
                  np.where(t < 3.0, 1.0, 4.0 - t)))
    from .core import PlanarCurve
    sq = geom.ClosedCurve(PlanarCurve(t=t, x1=x1, x2=x2))
    a_line = geom.weighted_area_line(params, sq)
    ok &= _check("unit_square_line_area_2/3", abs(a_line - 2.0 / 3.0) < 1e-6,
                 abs(a_line - 2.0 / 3.0), lines)
    a_reg = geom.weighted_area_region(params, sq, grid_n=512)
    ok &= _check("unit_square_region_area", abs(a_reg - 2.0 / 3.0) < 2e-3,
                 abs(a_reg - 2.0 / 3.0), lines)
    lhs, rhs, rok = geom.rado_check(params, sq)
    ok &= _check("rado_unit_square", rok, rhs - lhs, lines)
    ang = np.linspace(0.0, 2.0 * math.pi, 7)
    hexg = geom.ClosedCurve(PlanarCurve(t=np.arange(7.0),
                                        x1=np.cos(ang), x2=np.sin(ang)))
    turn = geom.total_turning(hexg)
    ok &= _check("gauss_bonnet_hexagon", abs(turn - 2.0 * math.pi) < 1e-6,
                 abs(turn - 2.0 * math.pi), lines)
    return ok


def _verify_flow(lines):
    params = StructureParams(b=5)
    ok = True
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(5):
        th = rng.uniform(0.0, 2.0 * math.pi)
        x = rng.uniform(-0.5, 0.5, size=2)
        lam = rng.uniform(-2.0, 2.0)
        p = x[0] * x[0] - x[1] ** 5
        st = HamiltonianState(p1=math.cos(th),
                              p2=math.sin(th) - p * p * lam,
                              p3=lam, x1=x[0], x2=x[1])
        states, _ = integrate_hamiltonian(params, st, 1.0,
                                          IntegratorConfig(step=1e-4))
        h = hamiltonian_values(params, states)
        worst = max(worst, float(np.max(np.abs(h - h[0]))))
    ok &= _check("hamiltonian_drift", worst <= 1e-9, worst, lines)
    tr = integrate_extremal(params, (0.4, 0.1), 0.3, 2.0, 0.5,
                            IntegratorConfig(step=2e-3))
    tr2 = integrate_extremal(params, (0.4, 0.1), 0.3, 2.0, 0.5,
                             IntegratorConfig(step=1e-3))
    r1 = curvature_residual(params, tr)
    r2 = curvature_residual(params, tr2)
    ratio = r1 / r2
    ok &= _check("curvature_residual_order2", 3.5 <= ratio <= 4.5,
                 abs(ratio - 4.0), lines)
    return ok


def _verify_levelset(lines):
    params = StructureParams(b=5)
    ok = True
    rep = lvl.asymptotic_report(params, 0.1, 3.75e-12)
    dev = abs(rep.ratio / 3.75 - 1.0)
    ok &= _check("asymptotic_ratio_3.75", dev < 0.02, dev, lines)
    geo, _ = lvl.build_nu(params, 0.0, 0.1, 1e-10)
    deficit = gamma_length(params, 0.0, 0.1) - lvl.nu_length(params, geo)
    ok &= _check("deficit_nonnegative", deficit >= -1e-12, deficit, lines)
    y0a, _ = lvl.solve_tangency_start(params, 0.0, 1e-9)
    y0b, _ = lvl.solve_tangency_start(params, 0.01, 1e-9)
    ok &= _check("y0_decreasing_in_s", y0b < y0a, y0a - y0b, lines)
    return ok


def cmd_verify(args):
    suites = {"geometry": _verify_geometry, "flow": _verify_flow,
              "levelset": _verify_levelset}
    names = list(suites) if args.suite == "all" else [args.suite]
    lines = []
    all_ok = True
    for name in names:
        all_ok &= suites[name](lines)
    for ln in lines:
        print(ln)
    return 0 if all_ok else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="lab",
                                 description="Martinet-type planar geodesic "
                                             "laboratory")
    ap.add_argument("--b", type=int, default=5)
    ap.add_argument("--out", default=None)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--config", default=None)
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gamma")
    g.add_argument("--s", type=float, default=0.0)
    g.add_argument("--eps", type=float, default=0.1)
    g.add_argument("--sweep", action="store_true")
    g.set_defaults(func=cmd_gamma)

    l = sub.add_parser("levelset")
    l.add_argument("--s", type=float, default=0.0)
    l.add_argument("--eps", type=float, default=0.1)
    l.add_argument("--zeta-min", type=float, default=1e-12)
    l.add_argument("--zeta-max", type=float, default=1e-9)
    l.add_argument("--zeta-count", type=int, default=7)
    l.set_defaults(func=cmd_levelset)

    m = sub.add_parser("minimize")
    m.add_argument("--s", type=float, default=0.005)
    m.add_argument("--eps", type=float, default=0.1)
    m.add_argument("--nodes", type=int, default=2000)
    m.add_argument("--seeds", type=int, default=16)
    m.add_argument("--sweep-n", type=int, default=20)
    m.add_argument("--tol", type=float, default=1e-6)
    m.add_argument("--mirror", action="store_true")
    m.set_defaults(func=cmd_minimize)

    sh = sub.add_parser("shoot")
    sh.add_argument("--s", type=float, default=0.005)
    sh.add_argument("--eps", type=float, default=0.1)
    sh.add_argument("--theta0", type=float, default=0.5)
    sh.add_argument("--lam", type=float, default=-1.0)
    sh.add_argument("--T", type=float, default=0.11)
    sh.set_defaults(func=cmd_shoot)

    ge = sub.add_parser("geometry")
    ge.add_argument("curve")
    ge.set_defaults(func=cmd_geometry)

    v = sub.add_parser("verify")
    v.add_argument("suite", choices=("geometry", "flow", "levelset", "all"))
    v.set_defaults(func=cmd_verify)

    br = sub.add_parser("branch")
    br.add_argument("--s", type=float, default=0.005)
    br.add_argument("--eps", type=float, default=0.1)
    br.add_argument("--nodes", type=int, default=256)
    br.set_defaults(func=cmd_branch)
    return ap


def main(argv=None):
    _apply_thread_cap()
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        try:
            cfg = _load_config(args.config)
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            return _fail_usage(str(exc))
        if "b" in cfg and "--b" not in (argv or sys.argv):
            args.b = int(cfg["b"])
        if "out" in cfg and not args.out:
            args.out = cfg["out"]
    try:
        return args.func(args)
    except (ValueError, RuntimeError) as exc:
        return _fail_usage(str(exc))


if __name__ == "__main__":
    sys.exit(main())
