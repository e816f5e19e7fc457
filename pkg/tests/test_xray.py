import numpy as np
import pytest

from affcurve import (
    ArityError,
    OrderError,
    XrayMapSpec,
    injectivity_probe,
    moment_curve,
    tie_limit_probe,
    xray_gi_ratio,
    xray_gi_ratios,
    xray_jacobian,
    xray_jacobian_fd,
    xray_map,
)

PHI2 = XrayMapSpec("Phi", 0.3, (0.1, -0.2))
PSI2 = XrayMapSpec("Psi", 0.25, (0.5, 0.0))
PHI3 = XrayMapSpec("Phi", -0.4, (0.0, 1.0, 2.0))
PSI3 = XrayMapSpec("Psi", -0.6, (1.0, 0.0, -1.0))


def test_map_examples():
    c = moment_curve(2)
    psi = XrayMapSpec("Psi", 0.7, (1.0, 2.0))
    np.testing.assert_allclose(xray_map(psi, c, [0.0, 0.3]), [0.3, 1.0, 2.0])
    np.testing.assert_allclose(xray_map(psi, c, [2.5, 0.7]), [0.7, 1.0, 2.0])
    phi = XrayMapSpec("Phi", 1.0, (0.0, 0.0))
    np.testing.assert_allclose(xray_map(phi, c, [1.0, 0.5]), [0.5, -0.5, -0.5])


def test_arity_and_parity_checks():
    c = moment_curve(2)
    with pytest.raises(ArityError):
        xray_map(PHI2, c, [0.1] * 4)
    with pytest.raises(ArityError):
        xray_jacobian(PHI2, c, [0.1, 0.2])
    with pytest.raises(ValueError):
        xray_map(XrayMapSpec("Phi", 0.0, (0, 0), parity="even"), c, [0.1])


def test_equal_consecutive_s_gives_zero_jacobian():
    c = moment_curve(2)
    assert xray_jacobian(PHI2, c, [0.5, 0.3, 0.9]) == pytest.approx(0.0, abs=1e-14)
    c3 = moment_curve(3)
    assert xray_jacobian(PSI3, c3, [0.4, 0.1, 0.4, 0.8]) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("spec,d", [(PHI2, 2), (PSI2, 2), (PHI3, 3), (PSI3, 3)],
                         ids=["Phi-odd", "Psi-odd", "Phi-even", "Psi-even"])
def test_analytic_jacobian_matches_finite_differences(spec, d):
    c = moment_curve(d)
    rng = np.random.default_rng(d + len(spec.kind))
    for _ in range(50):
        p = rng.uniform(-1.5, 1.5, d + 1)
        exact = xray_jacobian(spec, c, p)
        fd = xray_jacobian_fd(spec, c, p)
        assert abs(exact - fd) <= 1e-6 * abs(exact), (p, exact, fd)


def test_odd_ratio_is_constant_on_moment_curve():
    c = moment_curve(2)
    rng = np.random.default_rng(0)
    P = rng.uniform(-2, 2, (100, 3))
    r = xray_gi_ratios(PHI2, c, P)
    np.testing.assert_allclose(r, r[0], rtol=1e-9)


def test_even_ratio_infimum_is_positive():
    c = moment_curve(3)
    P = np.random.default_rng(1).uniform(-1, 1, (10_000, 4))
    r = xray_gi_ratios(PSI3, c, P)
    assert np.min(r) > 0


def test_tie_is_rejected_and_limit_bounded():
    c = moment_curve(3)
    with pytest.raises(OrderError):
        xray_gi_ratio(PHI3, c, [0.2, 0.5, 0.2, 0.9])
    out = tie_limit_probe(lambda p: xray_gi_ratio(PHI3, c, p), [0.2, 0.5, 0.7, 0.9], 0, 2)
    vals = np.array([v for _, v in out])
    assert np.all(np.isfinite(vals)) and vals.max() / vals.min() < 100


def test_injectivity_trivial_cases():
    c = moment_curve(2)
    box = [(-1, 1), (-1, 1), (-1, 1)]
    assert injectivity_probe(PHI2, c, box, n=1).max_multiplicity == 1
    rep = injectivity_probe(PHI2, c, box, n=20_000, tol=2e-2, ordered=True)
    assert rep.max_multiplicity == 1


def test_injectivity_bound_on_moment_curve():
    rep = injectivity_probe(PHI2, moment_curve(2), [(-1, 1), (-1, 1), (-1, 1)], n=20_000, tol=2e-2)
    assert rep.bound == 2
    assert rep.max_multiplicity <= rep.bound
    assert rep.candidates >= rep.unconfirmed
