import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from affcurve import (
    ArclengthParam,
    BuiltinCurve,
    MonomialCurve,
    OrderError,
    QuadOpts,
    RangeError,
    SingularTorsionError,
    affine_density,
    cumulative_arclength,
    jacobian_direct,
    jacobian_recursive,
    moment_curve,
    ratio_functions,
    torsion,
    torsion_profile,
)


def test_torsion_examples():
    c = moment_curve(2)
    assert torsion(c, 0.3, 2) == pytest.approx(2.0)
    assert torsion(c, -7.0, 1) == pytest.approx(1.0)
    assert torsion(MonomialCurve([1, 3], domain=(0, 5)), 2.0, 2) == pytest.approx(12.0)
    np.testing.assert_allclose(torsion(BuiltinCurve("helix"), np.linspace(-3, 3, 7), 3), -1.0)
    assert torsion(c, 0.0, 0) == 1.0


def test_affine_density_examples():
    assert affine_density(moment_curve(2), 0.4) == pytest.approx(2 ** (1 / 3))
    assert affine_density(MonomialCurve([1, 3], domain=(-1, 1)), 0.0) == 0.0
    assert affine_density(BuiltinCurve("helix"), 1.0) == pytest.approx(1.0)


def test_ratio_function_examples():
    assert ratio_functions(moment_curve(2), 0.7, 1) == pytest.approx((2.0, 2.0))
    _, B = ratio_functions(moment_curve(3), 0.2, 3)
    assert B == pytest.approx(12.0)
    t = np.array([0.5, 1.0, 2.0])
    _, B1 = ratio_functions(MonomialCurve([1, 3], domain=(0, 3)), t, 1)
    np.testing.assert_allclose(B1 / t, B1[0] / t[0])


def test_ratio_functions_report_vanishing_level():
    with pytest.raises(SingularTorsionError) as info:
        ratio_functions(MonomialCurve([2, 3], domain=(-1, 1)), 0.0, 1)
    assert info.value.j == 1


CURVES = [
    moment_curve(3),
    MonomialCurve([1, 2, 4], domain=(0, 1)),
    MonomialCurve([0.5, 1.5, 2.5, 4.0], [1, -1, 2, 1], domain=(0, 2)),
    BuiltinCurve("slow_spiral"),
]


@pytest.mark.parametrize("curve", CURVES, ids=lambda c: c.kind)
def test_ratio_product_identity(curve, rng):
    d = curve.dim
    lo = max(curve.domain[0], -1.0) + 0.1
    hi = min(curve.domain[1], 2.0) - 0.1
    t = rng.uniform(lo, hi, 20)
    for k in range(1, d + 1):
        prod = np.ones_like(t)
        for j in range(1, k + 1):
            A, _ = ratio_functions(curve, t, j)
            prod = prod * A**j
        _, B = ratio_functions(curve, t, k)
        np.testing.assert_allclose(prod, B, rtol=1e-9)


def test_jacobian_direct_examples():
    assert jacobian_direct(moment_curve(2), (0.0, 1.0)) == pytest.approx(2.0)
    assert jacobian_direct(moment_curve(3), (0.0, 1.0, 2.0)) == pytest.approx(12.0)
    assert jacobian_direct(BuiltinCurve("helix"), (0.3, 1.1, 0.3)) == pytest.approx(0.0, abs=1e-15)


@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_jacobian_direct_permutation_behaviour(ts):
    c = BuiltinCurve("helix")
    base = jacobian_direct(c, ts)
    for perm in itertools.permutations(range(3)):
        sign = np.linalg.det(np.eye(3)[list(perm)])
        val = jacobian_direct(c, [ts[i] for i in perm])
        assert val == pytest.approx(sign * base, rel=1e-12, abs=1e-14)


def test_jacobian_recursive_examples():
    c2 = moment_curve(2)
    assert jacobian_recursive(c2, (0.0, 1.0)) == pytest.approx(2.0, rel=1e-12)
    c3 = moment_curve(3)
    exact = 6 * 0.4 * 0.8 * 0.4
    assert jacobian_recursive(c3, (0.1, 0.5, 0.9), QuadOpts(1e-9, 1e-9)) == pytest.approx(exact, rel=1e-8)


def test_jacobian_recursive_matches_hand_recursion():
    # d = 2: J^2 = A^2(t1) A^2(t2) int_{t1}^{t2} A^1, with A^2 = 1 and A^1 = 6s for (t, t^3)
    c = MonomialCurve([1, 3], domain=(0, 2))
    t1, t2 = 0.5, 1.5
    A2 = ratio_functions(c, np.array([t1, t2]), 2)[0]
    np.testing.assert_allclose(A2, 1.0)
    assert ratio_functions(c, 0.7, 1)[0] == pytest.approx(6 * 0.7)
    inner = 3.0 * (t2**2 - t1**2)
    assert jacobian_recursive(c, (t1, t2)) == pytest.approx(A2[0] * A2[1] * inner, rel=1e-10)


def test_jacobian_recursive_errors():
    with pytest.raises(OrderError):
        jacobian_recursive(moment_curve(2), (0.5, 0.1))
    with pytest.raises(OrderError):
        jacobian_recursive(moment_curve(2), (0.5, 0.5))
    with pytest.raises(SingularTorsionError):
        jacobian_recursive(MonomialCurve([1, 3], domain=(-1, 1)), (-0.5, 0.5))


@given(st.lists(st.floats(0.01, 0.99), min_size=3, max_size=3, unique=True))
def test_recursive_equals_direct_for_monomial(ts):
    ts = sorted(ts)
    if min(np.diff(ts)) < 1e-3:
        return
    c = MonomialCurve([1, 2, 4], domain=(0, 1))
    direct = jacobian_direct(c, ts)
    rec = jacobian_recursive(c, ts, QuadOpts(1e-9, 1e-9))
    assert abs(rec - direct) <= 1e-6 * abs(direct)


def test_arclength_examples():
    c = moment_curve(2, (0.0, 1.0))
    assert cumulative_arclength(c, 0.0, 1.0) == pytest.approx(2 ** (1 / 3), rel=1e-12)
    ap = ArclengthParam(c, 0.0, 1.0)
    assert ap.h(0.0) == 0.0
    assert ap.h(2 ** (1 / 3) / 2) == pytest.approx(0.5, abs=1e-9)
    with pytest.raises(RangeError):
        ap.h(2.0)


@given(st.floats(0.0, 1.0))
def test_arclength_inverse_accuracy(frac):
    ap = _AP
    rho = frac * ap.total
    assert abs(ap.phi_at(ap.h(rho)) - rho) <= 1e-9 * (1 + rho)


_AP = ArclengthParam(MonomialCurve([1, 3], domain=(0.0, 2.0)), 0.0, 2.0)


def test_lambda_after_h_is_midpoint_concave():
    # lambda = (6t)^{1/3} is log-concave; lambda(h(rho)) is proportional to rho^{1/4}
    c = MonomialCurve([1, 3], domain=(0.0, 2.0))
    ap = ArclengthParam(c, 0.0, 1.0)
    rho = np.linspace(0.0, ap.total, 101)
    f = np.array([affine_density(c, ap.h(r)) if r > 0 else 0.0 for r in rho])
    mid = f[1:-1]
    assert np.all(mid >= (1 - 1e-9) * 0.5 * (f[:-2] + f[2:]))


def test_torsion_profile_csv():
    prof = torsion_profile(moment_curve(2), np.linspace(-1, 1, 5))
    lines = prof.to_csv().strip().splitlines()
    assert lines[0] == "t,L1,L2,lambda"
    assert len(lines) == 6
    np.testing.assert_allclose(prof.lam, 2 ** (1 / 3))
