"""Empirical checks of the convolution geometric inequality

    |det(gamma'(t_1), ..., gamma'(t_d))| >= C prod |L(t_j)|^{1/d} prod_{i<j} |t_j - t_i|

and of its exponential-gain strengthening for exponentially parametrized
monomial-like curves.  Infima are found by sampling plus Nelder-Mead
refinement; they are empirical, not certified.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .curves import MonomialCurve, MonomialLikeCurve, ReparamCurve
from .errors import ComplexityError, InputError, OrderError, SingularTorsionError, ZeroTorsionError
from .geometry import check_nonvanishing, ratio_functions, torsion_table
from .sampling import ordered_grid_tuples, partitions, sample_box

__all__ = [
    "gi_ratio",
    "gi_ratios",
    "GiReport",
    "gi_scan",
    "exp_gain_ratios",
    "exp_gain_fit",
    "ExpGainFit",
    "elementary_exp_estimate",
    "operational_tau",
    "decompose_for_gi",
    "tie_limit_probe",
]


def _pair_products(T):
    """``prod_{i<j} |t_j - t_i|`` and ``sum_{i<j} |t_j - t_i|`` per row."""
    d = T.shape[-1]
    prod = np.ones(T.shape[:-1])
    total = np.zeros(T.shape[:-1])
    for i in range(d):
        for j in range(i + 1, d):
            gap = np.abs(T[..., j] - T[..., i])
            prod = prod * gap
            total = total + gap
    return prod, total


def gi_ratios(curve, T, check=True):
    """Vectorised :func:`gi_ratio` over the rows of ``T`` (shape ``(M, d)``)."""
    T = np.atleast_2d(np.asarray(T, dtype=float))
    d = curve.dim
    if T.shape[-1] != d:
        raise InputError(f"need {d} parameters per tuple")
    if check:
        curve.check_domain(T)
        S = np.sort(T, axis=-1)
        if np.any(np.diff(S, axis=-1) == 0):
            raise OrderError("tuple contains a tie")
    jet = curve.jet(T, d, check=False)
    L = np.linalg.det(jet[..., 1:, :])
    if check and np.any(L == 0):
        row = np.flatnonzero(np.any(L == 0, axis=-1))[0]
        raise ZeroTorsionError(d, float(T[row][L[row] == 0][0]), "torsion vanishes at a tuple entry; ratio undefined")
    J = np.linalg.det(np.swapaxes(jet[..., 1, :], -1, -2))
    gaps, _ = _pair_products(T)
    den = np.prod(np.abs(L) ** (1.0 / d), axis=-1) * gaps
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.abs(J) / den


def gi_ratio(curve, params):
    """``|J| / (prod |L(t_i)|^{1/d} prod_{i<j} |t_j - t_i|)`` at one tuple.

    The ratio is symmetric in the tuple, so any order is accepted; ties are
    rejected.
    """
    return float(gi_ratios(curve, [params])[0])


# ---------------------------------------------------------------------------
# scans


@dataclass
class GiReport:
    """Result of a ratio scan.

    ``inf_ratio`` is the refined infimum; ``sample_inf`` the infimum over the
    raw samples only (monotone in ``n`` for nested sample sets).
    """

    n: int
    inf_ratio: float
    argmin: list
    seed: int
    sampler: str
    region: list
    sample_inf: float
    sample_argmin: list
    histogram: list
    underflow: bool
    partition_hint: list = None
    refined: bool = True
    extra: dict = field(default_factory=dict)

    @property
    def constant(self):
        """Empirical constant: the infimum itself."""
        return self.inf_ratio

    def to_dict(self):
        data = {
            "n": self.n,
            "inf_ratio": self.inf_ratio,
            "argmin": self.argmin,
            "seed": self.seed,
            "sampler": self.sampler,
            "region": self.region,
            "sample_inf": self.sample_inf,
            "sample_argmin": self.sample_argmin,
            "histogram": self.histogram,
            "underflow": self.underflow,
            "partition_hint": self.partition_hint,
        }
        data.update(self.extra)
        return data


def _interior_region(curve, region):
    lo, hi = map(float, region)
    dlo, dhi = curve.domain
    if not (dlo <= lo < hi <= dhi) or not (math.isfinite(lo) and math.isfinite(hi)):
        raise InputError(f"region {region} must be a finite sub-interval of {curve.domain}")
    return lo, hi


def _tuples(lo, hi, d, n, sampler, seed):
    """Partitions of sorted tuples in ``[lo, hi]^d``."""
    if sampler == "grid":
        T = ordered_grid_tuples(lo, hi, d, n)
        return [T[a:b] for _, a, b in partitions(T.shape[0])]
    parts = sample_box(np.full(d, lo), np.full(d, hi), n, sampler, seed)
    return [np.sort(P, axis=1) for P in parts]


def _histogram(r, bins=20):
    r = r[np.isfinite(r) & (r > 0)]
    if r.size == 0:
        return []
    a, b = float(r.min()), float(r.max())
    if a == b:
        return [{"lo": a, "hi": b, "count": int(r.size)}]
    edges = np.geomspace(a, b, bins + 1)
    counts, _ = np.histogram(r, edges)
    return [{"lo": float(edges[i]), "hi": float(edges[i + 1]), "count": int(c)} for i, c in enumerate(counts)]


def _scan_samples(ratio_fn, parts, workers):
    """Evaluate ``ratio_fn`` on every partition; reduce in partition order."""
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            vals = list(ex.map(ratio_fn, parts))
    else:
        vals = [ratio_fn(P) for P in parts]
    return np.concatenate(vals), np.concatenate(parts)


def _refine(objective, starts, lo, hi, maxiter):
    """Nelder-Mead on ``log ratio`` from each start; returns the best point found."""
    best_x, best_v = None, math.inf
    for x0 in starts:
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"maxiter": maxiter, "xatol": 1e-12 * (hi - lo), "fatol": 1e-14})
        if res.fun < best_v:
            best_v, best_x = float(res.fun), np.asarray(res.x)
    return best_x, best_v


def gi_scan(curve, region, sampler="random", n=1000, seed=0, refine=5, workers=1, underflow_tol=1e-12,
            min_gap=1e-4):
    """Infimum of :func:`gi_ratio` over sampled ordered tuples in ``region^d``.

    Parameters
    ----------
    curve : Curve
    region : (float, float)
        Sub-interval of the domain; its endpoints may touch the domain
        boundary but samples never do.
    sampler : {"grid", "random", "sobol"}
    n : int
    seed : int
    refine : int
        Number of worst samples used as Nelder-Mead starting points.
    workers : int
        Threads used over partitions; results do not depend on it.
    min_gap : float
        Refinement stays on tuples whose gaps exceed ``min_gap`` times the
        region length; closer tuples lose accuracy to cancellation in the
        determinant.

    Returns
    -------
    GiReport
        If some ``L^j`` vanishes in the region, ``partition_hint`` lists the
        pieces from :func:`decompose_for_gi` instead of failing.
    """
    lo, hi = _interior_region(curve, region)
    d = curve.dim
    hint = None
    try:
        check_nonvanishing(curve, *_shrink(curve, lo, hi))
    except SingularTorsionError:
        hint = [list(p) for p in decompose_for_gi(curve, (lo, hi))]
    parts = _tuples(lo, hi, d, n, sampler, seed)
    parts = [P[np.all(np.diff(P, axis=1) > 0, axis=1) & np.all(curve.contains(P), axis=1)] for P in parts]
    r, T = _scan_samples(lambda P: gi_ratios(curve, P, check=False), parts, workers)
    r = np.where(np.isfinite(r), r, np.inf)
    if r.size == 0 or not np.any(np.isfinite(r)):
        raise InputError("no valid samples in the region")
    i0 = int(np.argmin(r))
    sample_inf, sample_arg = float(r[i0]), T[i0].tolist()
    inf_r, arg = sample_inf, sample_arg

    if refine and sample_inf > 0:
        gap = min_gap * (hi - lo)

        def objective(x):
            s = np.sort(x)
            if s[0] <= lo or s[-1] >= hi or np.any(np.diff(s) <= gap) or not np.all(curve.contains(s)):
                return 1e300
            v = gi_ratios(curve, s[None, :], check=False)[0]
            return math.log(v) if v > 0 and np.isfinite(v) else (-1e300 if v == 0 else 1e300)

        order = np.argsort(r, kind="stable")[:refine]
        x, v = _refine(objective, T[order], lo, hi, 200 * d)
        if x is not None and v < math.log(inf_r):
            inf_r, arg = math.exp(v), np.sort(x).tolist()

    return GiReport(
        n=int(r.size), inf_ratio=inf_r, argmin=arg, seed=int(seed), sampler=sampler,
        region=[lo, hi], sample_inf=sample_inf, sample_argmin=sample_arg,
        histogram=_histogram(r), underflow=bool(np.any(r < underflow_tol)),
        partition_hint=hint, refined=bool(refine),
    )


def _shrink(curve, lo, hi):
    """Closed interval just inside ``(lo, hi)`` where the curve can be evaluated."""
    eps = 1e-9 * (hi - lo)
    a = lo if curve.contains(lo) else lo + eps
    b = hi if curve.contains(hi) else hi - eps
    return a, b


# ---------------------------------------------------------------------------
# exponential gain


def _inner_monomial(curve):
    if not (isinstance(curve, ReparamCurve) and curve.map.kind == "exponential"
            and isinstance(curve.inner, (MonomialCurve, MonomialLikeCurve))):
        raise InputError("exponential-gain checks need an exponential reparametrization of a monomial-like curve")
    return curve.inner


def exp_gain_ratios(curve, T, c):
    """Ratios ``|J| / (prod |L|^{1/d} prod |dt| e^{c (a_d - a_1) |dt|})`` per row."""
    a = _inner_monomial(curve).exponents
    T = np.atleast_2d(np.asarray(T, dtype=float))
    _, total = _pair_products(T)
    return gi_ratios(curve, T, check=False) * np.exp(-c * (a[-1] - a[0]) * total)


@dataclass
class ExpGainFit:
    c_star: float
    inf_ratio: float
    inf_ratio_c0: float
    n: int
    seed: int
    window: list
    threshold: float

    def to_dict(self):
        return dict(self.__dict__)


def exp_gain_fit(curve, window, n=10000, seed=0, sampler="random", threshold=1e-12, resolution=1e-4):
    """Largest ``c >= 0`` keeping the exponential-gain ratio above ``threshold``.

    The infimum is taken over the same sampled tuples for every ``c``;
    since each ratio is ``r_0 exp(-c (a_d - a_1) sum |dt|)`` it is monotone
    in ``c`` and bisection to ``resolution`` applies.
    """
    a = _inner_monomial(curve).exponents
    lo, hi = _interior_region(curve, window)
    parts = _tuples(lo, hi, curve.dim, n, sampler, seed)
    T = np.concatenate([P[np.all(np.diff(P, axis=1) > 0, axis=1)] for P in parts])
    r0 = gi_ratios(curve, T, check=False)
    ok = np.isfinite(r0) & (r0 > 0)
    r0, T = r0[ok], T[ok]
    _, total = _pair_products(T)
    spread = a[-1] - a[0]
    log_r0 = np.log(r0)

    def inf_at(c):
        return float(np.exp(np.min(log_r0 - c * spread * total)))

    base = inf_at(0.0)
    if base < threshold:
        return ExpGainFit(0.0, base, base, int(T.shape[0]), int(seed), [lo, hi], threshold)
    c_lo, c_hi = 0.0, 1.0
    while inf_at(c_hi) >= threshold:
        c_lo, c_hi = c_hi, 2 * c_hi
        if c_hi > 1e12:
            break
    while c_hi - c_lo > resolution:
        mid = 0.5 * (c_lo + c_hi)
        if inf_at(mid) >= threshold:
            c_lo = mid
        else:
            c_hi = mid
    return ExpGainFit(c_lo, inf_at(c_lo), base, int(T.shape[0]), int(seed), [lo, hi], threshold)


def elementary_exp_estimate(t, theta=0.5):
    """Smallest ratio ``|e^t - e^-t| / (|t| (1 - theta) e^{theta |t|})`` over ``t != 0``.

    The elementary estimate holds on the sample iff the result is ``>= 1``.
    """
    if not 0 <= theta < 1:
        raise InputError("theta must lie in [0, 1)")
    t = np.asarray(t, dtype=float)
    t = t[t != 0]
    at = np.abs(t)
    # ratio = 2 sinh|t| / (|t| (1 - theta) e^{theta |t|}), computed in logs
    log_num = at + np.log1p(-np.exp(-2 * at))
    log_den = np.log(at) + math.log(1 - theta) + theta * at
    return float(np.min(np.exp(log_num - log_den)))


def operational_tau(curve, t_max, n=2000, window=0.01):
    """First ``t`` after which ``|L_Gamma(t)| e^{A t} / c`` stays within ``window`` of 1.

    Here ``c = prod |a_i theta_i(0)| prod_{i<j} (a_j - a_i)``.  Returns
    ``None`` if the normalised torsion never settles on the scanned grid.
    """
    inner = _inner_monomial(curve)
    lo, hi = curve.domain
    t_max = min(float(t_max), hi)
    start = lo if math.isfinite(lo) else t_max - 50.0
    t = np.linspace(start, t_max, n + 1)[1:]
    t = t[curve.contains(t)]
    L = torsion_table(curve, t)[:, -1]
    g = np.abs(L) * np.exp(inner.exponent_sum * t) / inner.torsion_constant()
    bad = np.flatnonzero(np.abs(g - 1.0) > window)
    if bad.size == 0:
        return float(t[0])
    if bad[-1] == t.size - 1:
        return None
    return float(t[bad[-1] + 1])


# ---------------------------------------------------------------------------
# decomposition and tie probes


def _sign_changes(curve, grid, j):
    v = torsion_table(curve, grid)[:, j - 1]
    cuts = list(grid[v == 0])
    flips = np.flatnonzero((np.sign(v[:-1]) * np.sign(v[1:])) < 0)
    for i in flips:
        a, b = grid[i], grid[i + 1]
        sa = np.sign(v[i])
        for _ in range(80):
            m = 0.5 * (a + b)
            if m <= a or m >= b:
                break
            s = np.sign(torsion_table(curve, np.array([m]))[0, j - 1])
            if s == 0:
                a = b = m
                break
            if s == sa:
                a = m
            else:
                b = m
        cuts.append(0.5 * (a + b))
    return cuts


def _log_abs_B(curve, k, t):
    _, B = ratio_functions(curve, np.atleast_1d(t), k)
    return np.log(np.abs(B))


def decompose_for_gi(curve, region, n=2048, max_pieces=64):
    """Split ``region`` where the hypotheses of the geometric inequality change.

    Cuts are placed at zeros and sign changes of every ``L^j`` and at the
    interior maximum of each ``|B^k|`` (where it switches from increasing to
    decreasing).  Returns the pieces as ``(lo, hi)`` pairs.
    """
    lo, hi = _interior_region(curve, region)
    a, b = _shrink(curve, lo, hi)
    grid = np.linspace(a, b, n)
    cuts = set()
    for j in range(1, curve.dim + 1):
        cuts.update(float(c) for c in _sign_changes(curve, grid, j))
    edges = sorted({lo, hi} | {c for c in cuts if lo < c < hi})
    if len(edges) - 1 > max_pieces:
        raise ComplexityError(f"{len(edges) - 1} pieces exceed the cap of {max_pieces}")
    extra = set()
    for p, q in zip(edges[:-1], edges[1:]):
        pa, pb = _shrink(curve, p, q)
        pa, pb = pa + 1e-7 * (pb - pa), pb - 1e-7 * (pb - pa)
        g = np.linspace(pa, pb, max(16, int(n * (q - p) / (hi - lo))))
        for k in range(1, curve.dim + 1):
            try:
                f = _log_abs_B(curve, k, g)
            except SingularTorsionError:
                continue
            if not np.all(np.isfinite(f)):
                continue
            tol = 1e-12 * (1 + np.abs(f))
            up = np.diff(f) > tol[1:]
            down = np.diff(f) < -tol[1:]
            for i in range(1, g.size - 1):
                if up[i - 1] and down[i]:
                    res = minimize_scalar(lambda x: -_log_abs_B(curve, k, x)[0],
                                          bracket=(g[i - 1], g[i], g[i + 1]), method="golden")
                    extra.add(float(np.clip(res.x, g[i - 1], g[i + 1])))
    edges = sorted(set(edges) | {c for c in extra if lo < c < hi})
    if len(edges) - 1 > max_pieces:
        raise ComplexityError(f"{len(edges) - 1} pieces exceed the cap of {max_pieces}")
    return [(float(p), float(q)) for p, q in zip(edges[:-1], edges[1:])]


def tie_limit_probe(ratio_fn, params, i, j, eps=None):
    """Ratios along the path ``params[j] -> params[i]`` approaching a tie.

    Parameters
    ----------
    ratio_fn : callable
        Maps a parameter vector to a ratio, e.g. ``lambda p: gi_ratio(curve, p)``.
    params : sequence of float
    i, j : int
        Indices of the entries brought together; entry ``j`` moves.
    eps : sequence of float, optional
        Fractions of the initial gap, default ``10^-1 .. 10^-6``.

    Returns
    -------
    list of (eps, ratio)
    """
    p = np.asarray(params, dtype=float)
    eps = np.logspace(-1, -6, 6) if eps is None else np.asarray(eps, dtype=float)
    gap = p[j] - p[i]
    out = []
    for e in eps:
        q = p.copy()
        q[j] = p[i] + e * gap
        out.append((float(e), float(ratio_fn(q))))
    return out
