"""Seeded search for near-extremal set pairs of the restricted weak-type ratio.

The candidate schedule is fixed from the seed before anything is evaluated:

1. a lattice of Knapp pairs over ``(t0, delta, h)``;
2. random single-box pairs, ``F`` centred at ``centre(E) + gamma(t)`` with
   log-uniform side lengths;
3. coordinate ascent from the best candidate so far, halving the step when a
   sweep makes no progress.

The budget is split a quarter Knapp, half random, a quarter refinement, and
the schedule depends only on the seed and the budget, so repeated runs are
identical and independent of the number of worker threads.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .boxes import IndicatorSet
from .errors import AccuracyError, InputError, ResolutionError
from .operators import ExponentPair, WeightSpec, _range, knapp_pair, pairing, rwt_diagnostics, rwt_ratio
from .quadrature import QuadOpts

__all__ = ["SearchReport", "extremizer_search", "knapp_lattice"]

SEARCH_QUAD = QuadOpts(1e-12, 1e-8, 40)
KNAPP_SEGMENTS = 4
MAX_SWEEPS = 50
_SIZE_RANGE = (1e-3, 1.0)


@dataclass
class SearchReport:
    """Outcome of :func:`extremizer_search`.

    ``records`` holds one entry per evaluated candidate in schedule order;
    ``best_E`` and ``best_F`` are the sets of the best candidate.
    """

    best_ratio: float
    best: dict
    best_E: IndicatorSet
    best_F: IndicatorSet
    best_knapp_ratio: float
    min_slack: float
    evaluated: int
    skipped: int
    seed: int
    pq: ExponentPair
    records: list = field(default_factory=list)

    def to_dict(self, records=True):
        out = {
            "best_ratio": self.best_ratio,
            "best": self.best,
            "best_E": self.best_E.to_dict() if self.best_E is not None else None,
            "best_F": self.best_F.to_dict() if self.best_F is not None else None,
            "best_knapp_ratio": self.best_knapp_ratio,
            "min_slack": self.min_slack if math.isfinite(self.min_slack) else None,
            "evaluated": self.evaluated,
            "skipped": self.skipped,
            "seed": self.seed,
            "pq": self.pq.to_dict(),
        }
        if records:
            out["records"] = self.records
        return out


def knapp_lattice(A, B):
    """``(t0, delta, h)`` triples on a fixed lattice inside ``[A, B]``."""
    L = B - A
    out = []
    for j in range(1, 7):
        delta = L * 2.0**-j
        for h in (0.3, 1.0, 0.1, 3.0, 0.03, 0.01):
            for f in np.linspace(0.0, 1.0, 8, endpoint=False):
                t0 = A + f * L
                if t0 + delta <= B:
                    out.append((float(t0), float(delta), h))
    return out


def _thin(items, n):
    if n >= len(items):
        return list(items)
    idx = np.unique(np.round(np.linspace(0, len(items) - 1, n)).astype(int))
    return [items[i] for i in idx]


class _Evaluator:
    def __init__(self, curve, w, pq, A, B, quad):
        self.curve, self.w, self.pq, self.quad = curve, w, pq, quad
        self.A, self.B = A, B
        self.d = curve.dim

    def sets(self, kind, x):
        d = self.d
        if kind == "knapp":
            t0, ldelta, lh = x
            delta = math.exp(ldelta)
            t0 = min(max(t0, self.A), self.B - delta)
            return knapp_pair(self.curve, t0, delta, math.exp(lh), n_seg=KNAPP_SEGMENTS)
        cE, sE, cF, sF = x[:d], np.exp(x[d : 2 * d]), x[2 * d : 3 * d], np.exp(x[3 * d :])
        return IndicatorSet.box(cE - sE / 2, cE + sE / 2), IndicatorSet.box(cF - sF / 2, cF + sF / 2)

    def __call__(self, item):
        kind, x = item
        x = np.asarray(x, dtype=float)
        try:
            E, F = self.sets(kind, x)
            lam = pairing(self.curve, E, F, self.w, self.quad, (self.A, self.B))
            mE, mF = E.measure, F.measure
            ratio = rwt_ratio(lam, mE, mF, self.pq)
            diag = rwt_diagnostics(lam, mE, mF, self.d)
        except (AccuracyError, ResolutionError, InputError, FloatingPointError):
            return None
        if not math.isfinite(ratio):
            return None
        return {
            "kind": kind,
            "x": x.tolist(),
            "Lambda": lam,
            "measE": mE,
            "measF": mF,
            "ratio": ratio,
            "alpha": diag.alpha,
            "beta": diag.beta,
            "slack": diag.slack if math.isfinite(diag.slack) else None,
        }


def _initial_steps(kind, x, d, L):
    if kind == "knapp":
        return np.array([0.05 * L, 0.5, 0.5])
    sE, sF = np.exp(x[d : 2 * d]), np.exp(x[3 * d :])
    return np.concatenate([0.25 * sE, np.full(d, 0.5), 0.25 * sF, np.full(d, 0.5)])


def extremizer_search(curve, w=None, pq=None, budget=2000, seed=0, t_range=None, quad=None, workers=1):
    """Maximise ``Lambda / (|E|^{1/p} |F|^{1 - 1/q})`` over a seeded candidate schedule.

    Parameters
    ----------
    curve : Curve
    w : WeightSpec, default affine
    pq : ExponentPair, default the endpoint pair of the curve's dimension
    budget : int
        Number of candidates evaluated; ``budget=1`` evaluates the first one.
    seed : int
    t_range : (float, float), optional
        Needed when the curve domain is unbounded.
    workers : int
        Threads for the fixed part of the schedule; results do not depend on it.

    Returns
    -------
    SearchReport
    """
    budget = int(budget)
    if budget < 1:
        raise InputError("budget must be >= 1")
    w = WeightSpec("affine") if w is None else w
    w.validate(curve)
    d = curve.dim
    pq = ExponentPair.convolution_endpoint(d) if pq is None else pq
    quad = SEARCH_QUAD if quad is None else quad
    A, B = _range(curve, t_range)
    L = B - A
    ev = _Evaluator(curve, w, pq, A, B, quad)

    n_refine = budget // 4 if budget >= 8 else 0
    lattice = knapp_lattice(A, B)
    n_knapp = min(len(lattice), max(1, budget // 4))
    n_random = budget - n_knapp - n_refine

    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    tg = np.linspace(A, B, 257)
    tg[0] += 1e-9 * L
    tg[-1] -= 1e-9 * L
    pts = curve.jet(tg, 0, check=False)[:, 0, :]
    span = pts.max(axis=0) - pts.min(axis=0)
    span = np.maximum(span, 1e-12 * max(span.max(), 1e-300))

    schedule = [("knapp", (t0, math.log(dl), math.log(h))) for t0, dl, h in _thin(lattice, n_knapp)]
    lo_s, hi_s = np.log(_SIZE_RANGE[0]), np.log(_SIZE_RANGE[1])
    for _ in range(n_random):
        t1, t2 = A + L * rng.random(2)
        lsE = np.log(span) + rng.uniform(lo_s, hi_s, d)
        lsF = np.log(span) + rng.uniform(lo_s, hi_s, d)
        g1, g2 = curve.jet(np.array([t1, t2]), 0, check=False)[:, 0, :]
        cE = g1 + (rng.random(d) - 0.5) * np.exp(lsE)
        schedule.append(("box", np.concatenate([cE, lsE, cE + g2, lsF])))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            results = list(pool.map(ev, schedule))
    else:
        results = [ev(item) for item in schedule]

    records, skipped = [], 0
    for i, (item, r) in enumerate(zip(schedule, results)):
        if r is None:
            skipped += 1
            continue
        r["index"] = i
        r["stage"] = item[0]
        records.append(r)

    def best_of(recs):
        return max(recs, key=lambda r: r["ratio"]) if recs else None

    used = len(schedule)
    best = best_of(records)
    if best is not None and n_refine > 0:
        kind = best["kind"]
        x = np.array(best["x"])
        step = _initial_steps(kind, x, d, L)
        cur = best["ratio"]
        for _ in range(MAX_SWEEPS):
            if used >= budget:
                break
            improved = False
            for j in range(x.size):
                for sgn in (1.0, -1.0):
                    if used >= budget:
                        break
                    y = x.copy()
                    y[j] += sgn * step[j]
                    r = ev((kind, y))
                    used += 1
                    if r is None:
                        skipped += 1
                        continue
                    r["index"] = used - 1
                    r["stage"] = "refine"
                    records.append(r)
                    if r["ratio"] > cur:
                        cur, x, improved = r["ratio"], y, True
                        break
            if not improved:
                step = step / 2
        best = best_of(records)

    if best is None:
        return SearchReport(0.0, {}, None, None, 0.0, math.inf, used, skipped, int(seed), pq, records)
    E, F = ev.sets(best["kind"], np.array(best["x"]))
    knapp = [r["ratio"] for r in records if r["stage"] == "knapp"]
    slacks = [r["slack"] for r in records if r["slack"] is not None]
    return SearchReport(
        best_ratio=best["ratio"],
        best=best,
        best_E=E,
        best_F=F,
        best_knapp_ratio=max(knapp) if knapp else 0.0,
        min_slack=min(slacks) if slacks else math.inf,
        evaluated=used,
        skipped=skipped,
        seed=int(seed),
        pq=pq,
        records=records,
    )
