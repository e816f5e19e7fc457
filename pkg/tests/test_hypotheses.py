import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from affcurve import (
    BuiltinCurve,
    DegenerateHullError,
    FunctionSamples,
    InputError,
    MonomialCurve,
    check_almost_log_concave,
    check_almost_monotone,
    check_B_log_concave,
    convex_hull_probe,
    hull_volume,
    moment_curve,
    monomial_B_exponent,
)


def test_log_concave_examples():
    t = np.linspace(0, 2, 21)
    assert check_almost_log_concave(FunctionSamples(t, np.ones_like(t))).passed
    u = np.linspace(0.05, 1.0, 20)
    assert check_almost_log_concave(FunctionSamples(u, u**2)).passed
    rep = check_almost_log_concave(FunctionSamples(t, np.exp(t**2)))
    assert rep.verdict == "fail"
    assert rep.witness == [0.0, 2.0]
    assert rep.best_constant == pytest.approx(math.e, rel=1e-12)


def test_log_concave_zero_handling():
    t = np.linspace(0, 2, 5)
    rep = check_almost_log_concave(FunctionSamples(t, [1.0, 1.0, 0.0, 1.0, 1.0]), M=10)
    assert rep.verdict == "fail" and math.isinf(rep.best_constant)
    assert check_almost_log_concave(FunctionSamples(t, np.zeros(5))).passed


def test_refining_grid_never_lowers_best_constant():
    f = lambda t: np.exp(t**2) * (1.5 + np.sin(7 * t))
    best = [check_almost_log_concave(FunctionSamples.from_callable(f, np.linspace(0, 2, 10 * 2**i + 1))).best_constant
            for i in range(3)]
    assert best[0] <= best[1] <= best[2]


def test_interpolated_midpoints_are_flagged():
    t = np.sort(np.random.default_rng(3).uniform(0, 1, 15))
    rep = check_almost_log_concave(FunctionSamples(t, 1 + t), interpolate=True)
    assert rep.approximate and rep.passed


def test_monotone_examples():
    t = np.linspace(0.1, 1.0, 10)
    assert check_almost_monotone(FunctionSamples(t, np.full(10, 3.0))).classification == "both"
    rep = check_almost_monotone(FunctionSamples(t, t))
    assert rep.classification == "increasing"
    assert not rep.decreasing.passed and rep.decreasing.witness[0] < rep.decreasing.witness[1]
    s = np.linspace(0, 2, 21)
    rep = check_almost_monotone(FunctionSamples(s, s * (2 - s)), C=10)
    assert rep.classification == "neither"
    assert rep.increasing.witness is not None and rep.decreasing.witness is not None


def test_negative_samples_are_rejected():
    with pytest.raises(InputError):
        FunctionSamples([0, 1, 2], [1, -1, 1], nonnegative=True)
    with pytest.raises(InputError):
        check_almost_monotone(FunctionSamples([0, 1, 2], [1, -1, 1]))


def test_monomial_B_exponent_examples():
    assert monomial_B_exponent([1, 2], 1) == 0.0
    assert monomial_B_exponent([1, 2], 2) == 0.0
    assert monomial_B_exponent([1, 2, 4], 1) == 1.0
    with pytest.raises(InputError):
        monomial_B_exponent([2, 1], 1)


def _exponents():
    vals = [v for v in np.arange(-5.0, 5.5, 0.5) if v != 0]
    return st.integers(2, 4).flatmap(lambda d: st.lists(st.sampled_from(vals), min_size=d, max_size=d, unique=True))


@given(_exponents())
def test_exponent_sign_matches_numeric_log_concavity(a):
    a = sorted(a)
    curve = MonomialCurve(a, domain=(0.0, 1.0 + 1e-12))
    grid = np.linspace(0.02, 1.0, 50)
    for k in range(1, len(a) + 1):
        e = monomial_B_exponent(a, k)
        rep = check_B_log_concave(curve, k, grid, M=1 + 1e-9)
        assert rep.passed == (e >= 0), (a, k, e, rep.best_constant)


def test_hull_volume_exact():
    assert hull_volume([[0, 0], [2, 0], [0, 3], [0.5, 0.5]]) == pytest.approx(3.0)
    cube = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 2)])
    assert hull_volume(cube) == pytest.approx(2.0)
    with pytest.raises(DegenerateHullError):
        hull_volume([[0, 0], [1, 1], [2, 2]])


def test_hull_probe_examples():
    c = moment_curve(2, (0.0, 1.0))
    assert convex_hull_probe(c, (0.0, 1.0), 256) == pytest.approx(12 ** (1 / 3), rel=1e-4)
    helix = BuiltinCurve("helix")
    assert convex_hull_probe(helix, (0, 32 * math.pi), 4096) >= 8 * convex_hull_probe(helix, (0, 2 * math.pi), 256)
    spiral = BuiltinCurve("slow_spiral")
    r1 = convex_hull_probe(spiral, (1.0, 1.05))
    r2 = convex_hull_probe(spiral, (1.05, 1.10))
    assert 0.1 <= r1 / r2 <= 10


@pytest.mark.parametrize("n", [8, 32, 128])
def test_hull_probe_decreases_with_samples(n):
    c = MonomialCurve([1, 3], domain=(0.0, 2.0))
    assert convex_hull_probe(c, (0.2, 1.8), n) >= convex_hull_probe(c, (0.2, 1.8), 2 * n)


def test_hull_probe_rejects_high_dimension():
    with pytest.raises(InputError):
        convex_hull_probe(moment_curve(4), (0, 1))
