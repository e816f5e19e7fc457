import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from affcurve import (
    BuiltinCurve,
    DomainError,
    InputError,
    MonomialCurve,
    MonomialLikeCurve,
    Perturbation,
    PolynomialCurve,
    ReparamMap,
    UnsupportedOrderError,
    affine_image,
    curve_from_dict,
    moment_curve,
    reparametrize,
    torsion,
)


def _richardson(curve, t, m):
    """Derivative of order m from central differences of order m - 1 (test oracle)."""
    h = 1e-3 * max(1.0, abs(t))

    def cd(step):
        return (curve.eval(t + step, m - 1) - curve.eval(t - step, m - 1)) / (2 * step)

    return (4 * cd(h / 2) - cd(h)) / 3


CURVES = {
    "moment3": (moment_curve(3), (-2.0, 2.0)),
    "polynomial": (PolynomialCurve([[0, 1, 0.5], [1, 0, 0, 2], [0, 0, 1, 0, -1]]), (-1.5, 1.5)),
    "monomial": (MonomialCurve([0.5, 1.7, 3.2], [1.0, -2.0, 0.5], (0.0, 3.0)), (0.3, 2.5)),
    "monomial_like": (
        MonomialLikeCurve([1, 3], [{"family": "power", "c": 0.1, "p": 1}, {"family": "expflat", "c": 0.5}], (0, 4)),
        (0.3, 3.5),
    ),
    "helix": (BuiltinCurve("helix"), (-5.0, 5.0)),
    "slow_spiral": (BuiltinCurve("slow_spiral"), (0.2, 6.0)),
    "flat_exp": (BuiltinCurve("flat_exp"), (0.3, 3.0)),
    "flat_exp_pair": (BuiltinCurve("flat_exp_pair"), (0.3, 3.0)),
    "sjolin": (BuiltinCurve("sjolin", {"k": 2}, (0.0, 1.0)), (0.3, 0.95)),
    "reparam_power": (reparametrize(MonomialCurve([1, 2, 4]), ReparamMap("power", k=2.0)), (0.2, 0.9)),
    "reparam_exp": (reparametrize(MonomialCurve([1, 3]), "exponential"), (0.2, 5.0)),
    "affine": (affine_image(moment_curve(2), [[2.0, 1.0], [0.5, 3.0]], [1.0, -1.0]), (-2.0, 2.0)),
}


@pytest.mark.parametrize("name", sorted(CURVES))
def test_chain_rule_consistency_against_finite_differences(name, rng):
    curve, (lo, hi) = CURVES[name]
    for t in rng.uniform(lo, hi, 20):
        for m in range(1, curve.dim + 1):
            exact = curve.eval(t, m)
            approx = _richardson(curve, t, m)
            scale = max(1.0, float(np.max(np.abs(exact))))
            assert np.max(np.abs(exact - approx)) <= 1e-6 * scale, (name, t, m)


def test_eval_examples():
    np.testing.assert_allclose(moment_curve(2).eval(1.0, 1), [1.0, 2.0])
    np.testing.assert_allclose(BuiltinCurve("helix").eval(0.0, 3), [0.0, -1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(MonomialCurve([1, 3]).eval(0.5, 2), [0.0, 3.0])


def test_jet_shape_and_order_limits():
    c = moment_curve(3)
    assert c.jet(np.zeros((4, 5))).shape == (4, 5, 4, 3)
    with pytest.raises(UnsupportedOrderError):
        c.eval(0.0, 4)


def test_open_domain_rejects_endpoints():
    c = MonomialCurve([1, 2], domain=(0.0, 1.0))
    with pytest.raises(DomainError):
        c.eval(0.0)
    with pytest.raises(DomainError):
        c.eval(1.0)


def test_reparam_examples():
    c = reparametrize(moment_curve(2), ReparamMap("affine", a=2.0, b=0.0))
    np.testing.assert_allclose(c.eval(1.0, 1), [2.0, 8.0])
    e = reparametrize(MonomialCurve([1, 2]), "exponential")
    t = np.linspace(0.1, 8, 9)
    np.testing.assert_allclose(np.abs(torsion(e, t)), 2 * np.exp(-3 * t), rtol=1e-12)
    ident = reparametrize(moment_curve(2, (0, 1)), ReparamMap("power", k=1))
    ts = np.random.default_rng(1).uniform(0.05, 0.95, 5)
    np.testing.assert_allclose(ident.jet(ts), moment_curve(2).jet(ts), rtol=1e-15)


def test_reparam_escaping_domain_is_an_error():
    with pytest.raises(DomainError):
        reparametrize(MonomialCurve([1, 2], domain=(0, 1)), "exponential", domain=(-1.0, 2.0))
    with pytest.raises(DomainError):
        reparametrize(moment_curve(2), ReparamMap("power", k=2))


def test_affine_image_examples():
    c = moment_curve(2)
    ts = np.linspace(-1, 1, 7)
    np.testing.assert_allclose(affine_image(c, np.eye(2)).jet(ts), c.jet(ts))
    np.testing.assert_allclose(torsion(affine_image(c, np.diag([1.0, -1.0])), ts), -2.0)
    np.testing.assert_allclose(torsion(affine_image(c, np.diag([2.0, 1.0])), ts), 4.0)
    with pytest.raises(InputError):
        affine_image(c, [[1.0, 2.0], [2.0, 4.0]])


@given(
    st.lists(st.floats(0.2, 3.0), min_size=2, max_size=3, unique=True),
    st.floats(0.25, 3.0),
    st.floats(0.1, 0.9),
)
def test_power_reparam_covariance(gaps, k, t):
    a = np.cumsum(gaps)
    d = a.size
    inner = MonomialCurve(a, domain=(0.0, 1.0))
    outer = reparametrize(inner, ReparamMap("power", k=k))
    lhs = abs(torsion(outer, t))
    rhs = (k * t ** (k - 1)) ** (d * (d + 1) / 2) * abs(torsion(inner, t**k))
    assert lhs == pytest.approx(rhs, rel=1e-10)


@given(st.lists(st.floats(-2, 2), min_size=9, max_size=9), st.floats(-1.5, 1.5))
def test_affine_equivariance(entries, t):
    A = np.array(entries).reshape(3, 3)
    if abs(np.linalg.det(A)) < 1e-2:
        A = A + 3 * np.eye(3)
    c = moment_curve(3)
    img = affine_image(c, A, [1.0, 2.0, 3.0])
    assert torsion(img, t) == pytest.approx(np.linalg.det(A) * torsion(c, t), rel=1e-10)


def test_curves_are_immutable():
    c = moment_curve(2)
    with pytest.raises(AttributeError):
        c.coeffs = None


@pytest.mark.parametrize("name", sorted(CURVES))
def test_json_round_trip(name):
    curve, (lo, hi) = CURVES[name]
    back = curve_from_dict(curve.to_dict())
    t = np.linspace(lo, hi, 5)
    np.testing.assert_allclose(back.jet(t), curve.jet(t), rtol=1e-15)


def test_flat_exp_flushes_to_zero_near_origin():
    c = BuiltinCurve("flat_exp")
    j = c.jet(np.array([1e-4]))
    assert np.all(j[0, :, 1] == 0.0)
    assert np.all(np.isfinite(j))


def test_constructor_validation():
    with pytest.raises(InputError):
        MonomialCurve([2, 1])
    with pytest.raises(InputError):
        MonomialCurve([0.5, 1.5], domain=(-1.0, 1.0))
    with pytest.raises(InputError):
        Perturbation("power", 1.0)
    with pytest.raises(InputError):
        BuiltinCurve("helix", domain=(0.0, math.inf)).restrict(-1.0, 1.0)
