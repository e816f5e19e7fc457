"""Grid checks of the structural hypotheses on curves.

Almost log-concavity is tested in midpoint form,
``M |f((t1 + t2) / 2)| >= |f(t1)|^{1/2} |f(t2)|^{1/2}``, and almost
monotonicity as ``f(t1) <= C f(t2)`` for ``t1 <= t2`` (or the reverse).
Verdicts are empirical: they cover the sampled grid only.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import DegenerateHullError, InputError
from .geometry import cumulative_arclength, ratio_functions

__all__ = [
    "FunctionSamples",
    "HypothesisReport",
    "MonotoneReport",
    "check_almost_log_concave",
    "check_almost_monotone",
    "check_B_log_concave",
    "monomial_B_exponent",
    "hull_volume",
    "convex_hull_probe",
]


class FunctionSamples:
    """Values of a function on a strictly increasing grid of at least 3 points."""

    def __init__(self, t, values, nonnegative=False):
        t = np.asarray(t, dtype=float)
        v = np.asarray(values, dtype=float)
        if t.ndim != 1 or v.shape != t.shape:
            raise InputError("grid and values must be 1-D arrays of equal length")
        if t.size < 3:
            raise InputError("need at least 3 samples")
        if np.any(np.diff(t) <= 0):
            raise InputError("grid must be strictly increasing")
        if nonnegative and np.any(v < 0):
            raise InputError("negative sample in a function flagged nonnegative")
        self.t = t
        self.values = v
        self.nonnegative = bool(nonnegative)

    @classmethod
    def from_callable(cls, f, t, nonnegative=False):
        t = np.asarray(t, dtype=float)
        return cls(t, f(t), nonnegative)


@dataclass
class HypothesisReport:
    """Verdict, witness and the smallest constant that works on the grid."""

    verdict: str
    witness: list = None
    best_constant: float = 1.0
    approximate: bool = False

    @property
    def passed(self):
        return self.verdict == "pass"

    def to_dict(self):
        best = self.best_constant
        return {
            "verdict": self.verdict,
            "witness": self.witness,
            "best_constant": best if math.isfinite(best) else None,
            "approximate": self.approximate,
        }


@dataclass
class MonotoneReport:
    """Both directions of the almost-monotone test plus a classification."""

    increasing: HypothesisReport
    decreasing: HypothesisReport
    classification: str = field(init=False)

    def __post_init__(self):
        inc, dec = self.increasing.passed, self.decreasing.passed
        self.classification = {
            (True, True): "both",
            (True, False): "increasing",
            (False, True): "decreasing",
            (False, False): "neither",
        }[(inc, dec)]

    def to_dict(self):
        return {
            "classification": self.classification,
            "increasing": self.increasing.to_dict(),
            "decreasing": self.decreasing.to_dict(),
        }


def _pair_ratios(num, den):
    """``num / den`` with ``x / 0 = inf`` for ``x > 0`` and ``0 / 0 = 0``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        r = num / den
    r = np.where(den == 0, np.where(num > 0, np.inf, 0.0), r)
    return r


def check_almost_log_concave(f, M=1.0, interpolate=False):
    """Midpoint test of M-almost log-concavity on a grid.

    Parameters
    ----------
    f : FunctionSamples
    M : float
        Constant, at least 1.
    interpolate : bool
        Also test pairs whose midpoint is not a grid point, using linear
        interpolation of ``|f|``; the report is then flagged approximate.

    Returns
    -------
    HypothesisReport
        ``best_constant`` is the maximum of ``|f(t1) f(t2)|^{1/2} / |f(mid)|``
        over the tested pairs (at least 1).
    """
    if M < 1:
        raise InputError("M must be >= 1")
    t, a = f.t, np.abs(f.values)
    n = t.size
    scale = np.max(np.abs(t)) + (t[-1] - t[0])
    best, wit, approx = 1.0, None, False
    for i in range(n - 2):
        j = np.arange(i + 2, n)
        mid = 0.5 * (t[i] + t[j])
        k = np.searchsorted(t, mid)
        k = np.clip(k, 0, n - 1)
        lower = np.clip(k - 1, 0, n - 1)
        pick = np.where(np.abs(t[lower] - mid) < np.abs(t[k] - mid), lower, k)
        exact = np.abs(t[pick] - mid) <= 1e-12 * scale
        if interpolate:
            fmid = np.where(exact, a[pick], np.interp(mid, t, a))
            use = np.ones_like(exact)
            approx = approx or not np.all(exact)
        else:
            fmid = a[pick]
            use = exact
        if not np.any(use):
            continue
        r = _pair_ratios(np.sqrt(a[i] * a[j]), fmid)
        r = np.where(use, r, -np.inf)
        m = int(np.argmax(r))
        if r[m] > best:
            best = float(r[m])
            wit = [float(t[i]), float(t[j[m]])]
    verdict = "pass" if best <= M else "fail"
    return HypothesisReport(verdict, wit if verdict == "fail" else None, best, approx)


def _direction(a, t, C):
    # worst ratio f(t1) / f(t2) over t1 < t2
    pref = np.maximum.accumulate(a)[:-1]
    arg = np.array([int(np.argmax(a[: j + 1])) for j in range(a.size - 1)])
    r = _pair_ratios(pref, a[1:])
    m = int(np.argmax(r))
    best = max(1.0, float(r[m]))
    if best <= C:
        return HypothesisReport("pass", None, best)
    return HypothesisReport("fail", [float(t[arg[m]]), float(t[m + 1])], best)


def check_almost_monotone(f, C=1.0):
    """Test C-almost increasing and C-almost decreasing on a grid.

    Returns
    -------
    MonotoneReport
        With classification ``increasing``, ``decreasing``, ``both`` or
        ``neither``.  Witnesses are ordered pairs ``(t1, t2)`` that violate the
        respective inequality.
    """
    if C < 1:
        raise InputError("C must be >= 1")
    v = f.values
    if np.any(v < 0):
        raise InputError("almost monotonicity needs a nonnegative function")
    inc = _direction(v, f.t, C)
    rev = _direction(v[::-1], f.t[::-1], C)
    if rev.witness is not None:
        rev.witness = rev.witness[::-1]
    return MonotoneReport(inc, rev)


def monomial_B_exponent(a, k):
    """Exponent ``e`` with ``B^k`` of ``(t^{a_1}, ..., t^{a_d})`` proportional to ``t^e``.

    ``e = a_{d-k+1} + ... + a_d - k a_{d-k} - k (k + 1) / 2`` with ``a_0 = 0``.
    ``B^k`` is log-concave on ``(0, inf)`` exactly when ``e >= 0``.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size < 2 or not np.all(np.isfinite(a)):
        raise InputError("exponents must be a finite vector of length >= 2")
    if np.any(np.diff(a) <= 0):
        raise InputError("exponents must be strictly increasing")
    d = a.size
    if not 1 <= int(k) == k <= d:
        raise InputError(f"k must be an integer in 1..{d}")
    k = int(k)
    base = 0.0 if d - k == 0 else a[d - k - 1]
    return float(np.sum(a[d - k :]) - k * base - k * (k + 1) / 2)


def check_B_log_concave(curve, k, grid, M=1.0):
    """Midpoint log-concavity test of ``B^k`` of a curve on a grid."""
    _, B = ratio_functions(curve, np.asarray(grid, dtype=float), k)
    return check_almost_log_concave(FunctionSamples(grid, B), M)


def hull_volume(points):
    """Exact volume (area in 2D) of the convex hull of points in R^2 or R^3."""
    p = np.asarray(points, dtype=float)
    if p.ndim != 2 or p.shape[1] not in (2, 3):
        raise InputError("hull volume is supported in dimensions 2 and 3 only")
    try:
        hull = ConvexHull(p)
    except QhullError as exc:
        raise DegenerateHullError(f"convex hull is degenerate: {exc.args[0].splitlines()[0]}") from exc
    if p.shape[1] == 2:
        v = p[hull.vertices]  # counter-clockwise
        x, y = v[:, 0], v[:, 1]
        vol = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    else:
        c = p[hull.vertices].mean(axis=0)
        tri = p[hull.simplices] - c
        vol = float(np.sum(np.abs(np.linalg.det(tri)))) / 6.0
    if vol <= 1e-14:
        raise DegenerateHullError(f"convex hull volume {vol!r} is numerically zero")
    return float(vol)


def convex_hull_probe(curve, subinterval, n=256):
    """``int_a^b lambda / vol(ch(gamma(t_i)))^{2 / (d (d + 1))}``.

    The hull is taken over ``n`` equispaced samples, so it under-estimates the
    true hull and the returned ratio over-estimates the true one.
    """
    d = curve.dim
    if d not in (2, 3):
        raise InputError("hull probe supports d = 2 and d = 3 only")
    a, b = map(float, subinterval)
    lo, hi = curve.domain
    if not (lo <= a < b <= hi) or not (math.isfinite(a) and math.isfinite(b)):
        raise InputError(f"subinterval {subinterval} is not inside {curve.domain}")
    if n < d + 1:
        raise InputError(f"need at least {d + 1} samples")
    t = np.linspace(a, b, int(n))
    # endpoints on the open domain boundary are nudged inward
    nudge = 1e-9 * (b - a)
    if not curve.contains(t[0]):
        t[0] += nudge
    if not curve.contains(t[-1]):
        t[-1] -= nudge
    vol = hull_volume(curve.eval(t))
    mass = cumulative_arclength(curve, a, b)
    return mass / vol ** (2.0 / (d * (d + 1)))
