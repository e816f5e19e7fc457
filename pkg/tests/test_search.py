import math

import numpy as np
import pytest

from affcurve import (
    ExponentPair,
    InputError,
    WeightSpec,
    extremizer_search,
    knapp_pair,
    moment_curve,
    pairing,
    rwt_ratio,
)
from affcurve.search import KNAPP_SEGMENTS, SEARCH_QUAD, knapp_lattice

PARABOLA = moment_curve(2, (0.0, 1.0))


def test_budget_one_returns_the_single_candidate():
    rep = extremizer_search(PARABOLA, budget=1, seed=0)
    assert rep.evaluated == 1 and len(rep.records) == 1
    t0, delta, h = knapp_lattice(0.0, 1.0)[0]
    E, F = knapp_pair(PARABOLA, t0, delta, h, n_seg=KNAPP_SEGMENTS)
    lam = pairing(PARABOLA, E, F, quad=SEARCH_QUAD)
    expected = rwt_ratio(lam, E.measure, F.measure, ExponentPair.convolution_endpoint(2))
    assert rep.best_ratio == pytest.approx(expected, rel=1e-12)


def test_budget_must_be_positive():
    with pytest.raises(InputError):
        extremizer_search(PARABOLA, budget=0)


@pytest.fixture(scope="module")
def small_run():
    return extremizer_search(PARABOLA, budget=60, seed=7)


def test_search_is_deterministic_and_thread_independent(small_run):
    again = extremizer_search(PARABOLA, budget=60, seed=7, workers=3)
    assert again.to_dict() == small_run.to_dict()


def test_every_record_satisfies_the_slack_identity(small_run):
    assert small_run.evaluated == 60
    assert len(small_run.records) + small_run.skipped == 60
    for r in small_run.records:
        assert {"alpha", "beta", "slack", "Lambda", "measE", "measF"} <= set(r)
        if r["ratio"] > 0:
            assert r["slack"] * r["ratio"] ** 3 == pytest.approx(1.0, rel=1e-9)


def test_min_slack_matches_best_ratio(small_run):
    assert small_run.min_slack > 0
    normalized = small_run.min_slack ** (-1 / 3)
    assert small_run.best_ratio / 4 <= normalized <= 4 * small_run.best_ratio


def test_refinement_never_lowers_the_best(small_run):
    staged = [r["ratio"] for r in small_run.records if r["stage"] != "refine"]
    assert small_run.best_ratio >= max(staged)
    assert small_run.best_ratio >= small_run.best_knapp_ratio


def test_best_sets_reproduce_best_ratio(small_run):
    E, F = small_run.best_E, small_run.best_F
    lam = pairing(PARABOLA, E, F, quad=SEARCH_QUAD)
    r = rwt_ratio(lam, E.measure, F.measure, small_run.pq)
    assert r == pytest.approx(small_run.best_ratio, rel=1e-9)


def test_unbounded_domain_needs_range():
    with pytest.raises(InputError):
        extremizer_search(moment_curve(2), budget=4)
    rep = extremizer_search(moment_curve(2), budget=4, t_range=(-1.0, 1.0), w=WeightSpec("unweighted"))
    assert math.isfinite(rep.best_ratio)


def test_lattice_stays_inside_range():
    lat = np.array(knapp_lattice(2.0, 5.0))
    assert np.all(lat[:, 0] >= 2.0) and np.all(lat[:, 0] + lat[:, 1] <= 5.0)
