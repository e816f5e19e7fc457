"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Tolerances and time budgets are the ones fixed by the acceptance criteria.
A criterion that exceeds its time budget is reported as FAIL.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from affcurve import (
    BuiltinCurve,
    ExponentPair,
    IndicatorSet,
    MonomialCurve,
    MonomialLikeCurve,
    Perturbation,
    PolynomialCurve,
    QuadOpts,
    WeightSpec,
    XrayMapSpec,
    box_union,
    check_B_log_concave,
    convex_hull_probe,
    decompose,
    elementary_exp_estimate,
    exp_gain_fit,
    exponent_region,
    extremizer_search,
    gi_scan,
    injectivity_probe,
    jacobian_direct,
    jacobian_recursive,
    knapp_pair,
    moment_curve,
    monomial_B_exponent,
    operational_tau,
    pairing,
    real_parts_of_roots,
    reparametrize,
    rwt_ratio,
    torsion,
    verify_comparability,
    xray_gi_ratios,
    xray_jacobian,
    xray_jacobian_fd,
)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail, elapsed, budget):
        within = elapsed <= budget
        verdict = "PASS" if ok and within else "FAIL"
        with capsys.disabled():
            print(f"\nCRITERION {number:2d} {verdict}: {title}: {detail} [{elapsed:.2f}s of {budget:g}s]")
        assert ok, detail
        assert within, f"took {elapsed:.2f}s, budget {budget}s"

    return emit


def test_01_jacobian_identity(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    curves = {
        "moment d=2": moment_curve(2, (0.0, 1.0)),
        "moment d=3": moment_curve(3, (0.0, 1.0)),
        "monomial (1,2,4)": MonomialCurve([1, 2, 4], domain=(0.0, 1.0)),
    }
    worst = {}
    for name, c in curves.items():
        T = np.sort(rng.uniform(0, 1, (100, c.dim)), axis=1)
        Jr = jacobian_recursive(c, T, QuadOpts(1e-9, 1e-9))
        Jd = jacobian_direct(c, T)
        worst[name] = float(np.max(np.abs(Jr - Jd) / np.abs(Jd)))
    ok = all(v <= 1e-6 for v in worst.values())
    detail = ", ".join(f"{k} max rel err {v:.1e}" for k, v in worst.items())
    report(1, "recursive vs direct Jacobian", ok, detail, time.perf_counter() - t0, 10)


def test_02_exact_gi_constants(report):
    t0 = time.perf_counter()
    r2 = gi_scan(moment_curve(2), (0.0, 1.0), n=1000, seed=0).inf_ratio
    r3 = gi_scan(moment_curve(3), (0.0, 1.0), n=1000, seed=0).inf_ratio
    ok = abs(r2 - 1.0) <= 1e-9 and abs(r3 - 0.5) <= 1e-9
    report(2, "exact GI constants", ok, f"(t,t^2) inf {r2:.12f}, (t,t^2,t^3) inf {r3:.12f}",
           time.perf_counter() - t0, 5)


def test_03_monomial_criterion(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    grid = np.linspace(0.01, 1.0, 100)
    mismatches, checks = [], 0
    for _ in range(50):
        d = int(rng.integers(2, 5))
        while True:
            a = np.sort(rng.uniform(-5, 5, d))
            if np.all(a != 0) and np.all(np.diff(a) > 0):
                break
        curve = MonomialCurve(a, domain=(0.0, 1.5))
        for k in range(1, d + 1):
            e = monomial_B_exponent(a, k)
            verdict = check_B_log_concave(curve, k, grid, M=1 + 1e-9).passed
            checks += 1
            if verdict != (e >= 0):
                mismatches.append((a.tolist(), k, e))
    report(3, "B-exponent sign vs log-concavity", not mismatches,
           f"{checks} (tuple, k) checks, {len(mismatches)} mismatches", time.perf_counter() - t0, 30)


def test_04_exponential_parametrization(report):
    t0 = time.perf_counter()
    pure = reparametrize(MonomialCurve([1, 3], domain=(0.0, 1.0)), "exponential")
    c = pure.inner.torsion_constant()
    t = np.random.default_rng(4).uniform(0.0, 30.0, 500)
    g = np.abs(torsion(pure, t)) * np.exp(4 * t) / c
    err_pure = float(np.max(np.abs(g - 1)))
    inner = MonomialLikeCurve([1, 3], [Perturbation("power", 0.1, 1), Perturbation("power", 0.1, 1)], (0.0, 1.0))
    pert = reparametrize(inner, "exponential")
    tau = operational_tau(pert, 30.0)
    s = np.linspace(tau, 30.0, 500)
    gp = np.abs(torsion(pert, s)) * np.exp(4 * s) / inner.torsion_constant()
    err_pert = float(np.max(np.abs(gp - 1)))
    ok = err_pure <= 1e-9 and tau is not None and err_pert <= 0.01
    report(4, "exponential parametrization torsion", ok,
           f"pure max dev {err_pure:.1e}; perturbed tau {tau:.3f}, max dev beyond tau {err_pert:.4f}",
           time.perf_counter() - t0, 5)


def test_05_exponential_gain(report):
    t0 = time.perf_counter()
    curve = reparametrize(MonomialCurve([1, 2], domain=(0.0, 1.0)), "exponential")
    fit = exp_gain_fit(curve, (0.0, 20.0), n=10_000, seed=0)
    t = np.random.default_rng(5).uniform(0.0, 10.0, 1000)
    holds = bool(np.all(np.abs(np.exp(t) - np.exp(-t)) >= 0.5 * np.abs(t) * np.exp(np.abs(t) / 2)))
    margin = elementary_exp_estimate(t, 0.5)
    ok = fit.c_star >= 0.01 and fit.inf_ratio > 0 and holds and margin >= 1
    report(5, "exponential gain", ok,
           f"c* {fit.c_star:.4f}, inf at c* {fit.inf_ratio:.3e}, elementary estimate min ratio {margin:.4f}",
           time.perf_counter() - t0, 30)


def test_06_convex_hull_failure(report):
    t0 = time.perf_counter()
    helix = BuiltinCurve("helix")
    short = convex_hull_probe(helix, (0.0, 2 * math.pi), 256)
    long = convex_hull_probe(helix, (0.0, 32 * math.pi), 256 * 16)
    report(6, "helix hull ratio growth", long >= 8 * short,
           f"ratio(2pi) {short:.4f}, ratio(32pi) {long:.4f}, growth {long / short:.2f}x",
           time.perf_counter() - t0, 10)


def test_07_rwt_boundedness(report):
    t0 = time.perf_counter()
    curve = moment_curve(2, (0.0, 1.0))
    pq = ExponentPair(Fraction(3, 2), Fraction(3))
    runs = [extremizer_search(curve, WeightSpec("affine"), pq, budget=2000, seed=s) for s in (0, 1, 2)]
    best = [r.best_ratio for r in runs]
    spread = max(best) / min(best)
    min_slack = min(r.min_slack for r in runs)
    E, F = knapp_pair(curve, 0.0, 0.25, 0.01)
    knapp = rwt_ratio(pairing(curve, E, F), E.measure, F.measure, pq)
    knapp_best = max(r.best_knapp_ratio for r in runs)
    ok = spread <= 1.10 and min_slack > 0 and knapp * 4 >= max(best) and knapp_best * 4 >= max(best)
    report(7, "RWT boundedness probe on the parabola", ok,
           f"best ratios {', '.join(f'{b:.5f}' for b in best)}, spread {spread:.4f}, min slack {min_slack:.4f}, "
           f"Knapp (0, 0.25, 0.01) {knapp:.5f}, best lattice Knapp {knapp_best:.5f}",
           time.perf_counter() - t0, 120)


def test_08_unboundedness_contrast(report):
    t0 = time.perf_counter()
    helix = BuiltinCurve("helix")
    pq = ExponentPair.convolution_endpoint(3)
    w = WeightSpec("unweighted")
    short = extremizer_search(helix, w, pq, budget=2000, seed=0, t_range=(0.0, 8 * math.pi)).best_ratio
    long = extremizer_search(helix, w, pq, budget=2000, seed=0, t_range=(0.0, 64 * math.pi)).best_ratio
    report(8, "unweighted helix ratio grows with length", long >= 2 * short,
           f"pq (2, 3); best(8pi) {short:.4f}, best(64pi) {long:.4f}, growth {long / short:.2f}x",
           time.perf_counter() - t0, 120)


def test_09_xray_jacobians(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    worst_fd, infima = 0.0, {}
    for d in (2, 3):
        c = moment_curve(d)
        for kind in ("Phi", "Psi"):
            for _ in range(50):
                spec = XrayMapSpec(kind, rng.uniform(-1, 1), rng.uniform(-1, 1, d))
                p = rng.uniform(-1.5, 1.5, d + 1)
                exact = xray_jacobian(spec, c, p)
                worst_fd = max(worst_fd, abs(exact - xray_jacobian_fd(spec, c, p)) / abs(exact))
            spec = XrayMapSpec(kind, 0.3, np.linspace(-0.5, 0.5, d))
            P = rng.uniform(-1, 1, (10_000, d + 1))
            infima[f"{kind} d={d}"] = float(np.min(xray_gi_ratios(spec, c, P)))
    ok = worst_fd <= 1e-6 and all(v > 0 for v in infima.values())
    detail = f"worst FD rel err {worst_fd:.1e}; infima " + ", ".join(f"{k} {v:.3e}" for k, v in infima.items())
    report(9, "X-ray Jacobians", ok, detail, time.perf_counter() - t0, 60)


def test_10_near_injectivity(report):
    t0 = time.perf_counter()
    spec = XrayMapSpec("Phi", 0.3, (0.1, -0.2))
    rep = injectivity_probe(spec, moment_curve(2), [(-1, 1), (-1, 1), (-1, 1)], n=100_000, seed=0)
    report(10, "near-injectivity of Phi^3 at d=2", rep.max_multiplicity <= 2,
           f"max confirmed multiplicity {rep.max_multiplicity} (bound {rep.bound}), "
           f"{rep.confirmed_collisions} collisions, {rep.unconfirmed} unconfirmed of {rep.candidates}",
           time.perf_counter() - t0, 60)


def test_11_polynomial_decomposition(report):
    from numpy.polynomial import Polynomial

    t0 = time.perf_counter()
    L = Polynomial.fromroots([0, 0, 1, 1, 1]) * Polynomial([1, 0, 1])
    pieces = decompose(L, real_parts_of_roots(L), (-2.0, 3.0))
    ends_ok = pieces[0].interval[0] == -2.0 and pieces[-1].interval[1] == 3.0
    tiles = ends_ok and all(abs(a.interval[1] - b.interval[0]) <= 1e-12 for a, b in zip(pieces, pieces[1:]))
    near0 = [p for p in pieces if p.interval[0] < 0 < p.interval[1]]
    near1 = [p for p in pieces if p.interval[0] < 1 < p.interval[1]]
    orders = (len(near0) == 1 and (near0[0].anchor, near0[0].k) == (0.0, 2)
              and len(near1) == 1 and abs(near1[0].anchor - 1) < 1e-9 and near1[0].k == 3)
    worst = max(verify_comparability(pieces, L, 1000))
    ok = tiles and orders and worst <= 100
    report(11, "polynomial decomposition", ok,
           f"{len(pieces)} pieces, tiles {tiles}, anchor/order near 0 ({near0[0].anchor:g}, {near0[0].k}) "
           f"near 1 ({near1[0].anchor:g}, {near1[0].k}), worst factor {worst:.2f}",
           time.perf_counter() - t0, 10)


def test_12_exponent_region(report):
    t0 = time.perf_counter()
    cubic = exponent_region(PolynomialCurve([[0, 1], [0, 0, 0, 1]]))
    quartic = exponent_region(PolynomialCurve([[0, 1], [0, 0, 0, 0, 1]]))
    ok = (cubic.theta_loc == cubic.theta_glob == Fraction(3, 4)
          and quartic.theta_loc == quartic.theta_glob == Fraction(3, 5))
    report(12, "exponent region theta", ok,
           f"(t,t^3) theta {cubic.theta_loc}/{cubic.theta_glob}, (t,t^4) theta {quartic.theta_loc}/{quartic.theta_glob}",
           time.perf_counter() - t0, 1)


def test_13_weight_consistency(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(13)
    curves = [moment_curve(2, (0.0, 1.0)), MonomialCurve([1, 2.5], domain=(0.0, 2.0)),
              MonomialCurve([1, 2, 4], domain=(0.0, 1.0))]
    worst = 0.0
    for i in range(10):
        c = curves[i % len(curves)]
        d = c.dim
        lo = rng.uniform(-1, 1, (2, d))
        E = box_union([np.stack([lo[0], lo[0] + rng.uniform(0.2, 1.5, d)], axis=-1)])
        F = box_union([np.stack([lo[1], lo[1] + rng.uniform(0.2, 1.5, d)], axis=-1)])
        t_base = float(rng.uniform(*c.domain))
        a = pairing(c, E, F, WeightSpec("affine"))
        b = pairing(c, E, F, WeightSpec("interp_theta", theta=1.0, t0=t_base))
        worst = max(worst, abs(a - b) / max(1.0, abs(a)))
    report(13, "interp_theta at theta=1 equals affine", worst <= 1e-10,
           f"worst difference {worst:.1e} over 10 configurations", time.perf_counter() - t0, 30)
