"""Weighted averaging operators evaluated on box-union sets.

``T f(x) = int f(x - gamma(t)) w(t) dt`` is paired with indicators of
box unions.  For each ``t`` the inner quantity ``vol((E + gamma(t)) ∩ F)`` is
computed exactly by interval algebra; only the one-dimensional ``t``
integral is numerical.  Kinks of the integrand are located first and used as
breakpoints, and weights that blow up at open or singular endpoints are
integrated on dyadic pieces with a geometric tail estimate.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .boxes import IndicatorSet, box_union, overlap_volume
from .errors import AccuracyError, InputError, ResolutionError
from .quadrature import QuadOpts, integrate_batch

__all__ = [
    "ExponentPair",
    "WeightSpec",
    "RwtDiagnostics",
    "pairing",
    "adjoint_pairing",
    "apply_pointwise",
    "xray_pairing",
    "rwt_ratio",
    "rwt_diagnostics",
    "knapp_pair",
    "knapp_scales",
]


# ---------------------------------------------------------------------------
# exponents


def _frac(x):
    return x if isinstance(x, Fraction) else Fraction(x).limit_denominator(10**9)


@dataclass(frozen=True)
class ExponentPair:
    """Lebesgue exponents ``(p, q)``; kept as exact fractions."""

    p: Fraction
    q: Fraction

    def __post_init__(self):
        p, q = _frac(self.p), _frac(self.q)
        if not p > 1 or not q > 1:
            raise InputError("exponents must satisfy 1 < p and 1 < q < inf")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def convolution_endpoint(cls, d):
        """``(p_d, q_d) = ((d + 1) / 2, d (d + 1) / (2 (d - 1)))``."""
        d = int(d)
        if d < 2:
            raise InputError("d must be >= 2")
        return cls(Fraction(d + 1, 2), Fraction(d * (d + 1), 2 * (d - 1)))

    @classmethod
    def xray_endpoint(cls, d):
        """``(r_d, s_d) = ((d + 1)(d + 2) / (d^2 + d + 2), (d + 2) / d)``."""
        d = int(d)
        if d < 2:
            raise InputError("d must be >= 2")
        return cls(Fraction((d + 1) * (d + 2), d * d + d + 2), Fraction(d + 2, d))

    @classmethod
    def theta_scaled(cls, d, theta):
        """``(p_d / theta, q_d / theta)``."""
        th = _frac(theta)
        if not 0 < th <= 1:
            raise InputError("theta must lie in (0, 1]")
        base = cls.convolution_endpoint(d)
        return cls(base.p / th, base.q / th)

    def dual(self):
        """``(q', p')`` with ``1/r + 1/r' = 1``."""
        return ExponentPair(self.q / (self.q - 1), self.p / (self.p - 1))

    def to_dict(self):
        return {"p": float(self.p), "q": float(self.q), "p_exact": str(self.p), "q_exact": str(self.q)}


# ---------------------------------------------------------------------------
# weights


class WeightSpec:
    """The measure ``w(t) dt`` of an averaging operator.

    Variants
    --------
    ``affine``          ``w = lambda``
    ``unweighted``      ``w = 1``
    ``interp_theta``    ``w = |phi(t)|^{theta - 1} lambda`` with ``phi(t) = int_{t0}^t lambda``
    ``monomial_theta``  ``w = lambda^theta / t^{1 - theta}`` (domain inside ``t > 0``)
    """

    VARIANTS = ("affine", "unweighted", "interp_theta", "monomial_theta")

    def __init__(self, variant="affine", theta=None, t0=None):
        if variant not in self.VARIANTS:
            raise InputError(f"unknown weight {variant!r}; choose one of {self.VARIANTS}")
        if variant in ("interp_theta", "monomial_theta"):
            if theta is None or not 0 < float(theta) <= 1:
                raise InputError("theta must lie in (0, 1]")
            theta = float(theta)
        if variant == "interp_theta":
            if t0 is None:
                raise InputError("interp_theta needs a base point t0")
            t0 = float(t0)
        self.variant = variant
        self.theta = theta
        self.t0 = t0

    @classmethod
    def from_dict(cls, data):
        if isinstance(data, str):
            return cls(data)
        return cls(data.get("variant", "affine"), data.get("theta"), data.get("t0"))

    def to_dict(self):
        return {"variant": self.variant, "theta": self.theta, "t0": self.t0}

    def __repr__(self):
        return f"WeightSpec({self.to_dict()!r})"

    def validate(self, curve):
        if self.variant == "interp_theta" and not curve.contains(self.t0):
            raise InputError(f"t0={self.t0} is not inside the curve domain")
        if self.variant == "monomial_theta" and curve.domain[0] < 0:
            raise InputError("monomial_theta weight needs a domain inside t > 0")

    def singular_points(self, curve):
        pts = []
        if self.variant == "interp_theta" and self.theta < 1:
            pts.append(self.t0)
        if self.variant == "monomial_theta" and self.theta < 1:
            pts.append(0.0)
        return pts

    def evaluator(self, curve, A, B):
        """Vectorised ``w`` valid on ``[A, B]``."""
        d = curve.dim
        expo = 2.0 / (d * (d + 1))

        def lam(t):
            jet = curve.jet(t, d, check=False)
            return np.abs(np.linalg.det(jet[..., 1:, :])) ** expo

        if self.variant == "affine":
            return lam
        if self.variant == "unweighted":
            return lambda t: np.ones_like(t)
        if self.variant == "monomial_theta":
            th = self.theta
            return lambda t: lam(t) ** th * np.power(t, th - 1.0)
        th = self.theta
        if th == 1.0:
            return lam
        prim = _Primitive(lam, self.t0, min(A, self.t0), max(B, self.t0))
        return lambda t: np.abs(prim(t)) ** (th - 1.0) * lam(t)


class _Primitive:
    """``phi(t) = int_{t0}^t lam`` from a table plus one short quadrature per node."""

    def __init__(self, lam, t0, A, B, n=257):
        self.lam = lam
        grid = np.unique(np.concatenate([np.linspace(A, B, n), [t0]]))
        pieces, _ = integrate_batch(lambda x, _: lam(x), grid[:-1], grid[1:],
                                    QuadOpts(1e-13, 1e-12, 50), raise_on_fail=False)
        cum = np.concatenate([[0.0], np.cumsum(pieces)])
        self.grid = grid
        self.cum = cum - cum[np.searchsorted(grid, t0)]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        k = np.clip(np.searchsorted(self.grid, t, side="right") - 1, 0, self.grid.size - 2)
        # integrate from the nearer table node
        near = np.where(t - self.grid[k] <= self.grid[k + 1] - t, k, k + 1)
        vals, _ = integrate_batch(lambda x, _: self.lam(x), self.grid[near], t,
                                  QuadOpts(1e-14, 1e-12, 40), raise_on_fail=False)
        return self.cum[near] + vals


# ---------------------------------------------------------------------------
# integration engine


def _crossings(curve, axis, targets, A, B, n=512):
    """All ``t`` in ``(A, B)`` with ``gamma_axis(t) = target`` for some target.

    Sign changes on a grid are refined by vectorised bisection.
    """
    targets = np.unique(np.asarray(targets, dtype=float))
    if targets.size == 0:
        return np.zeros(0)
    g = np.linspace(A, B, n + 1)
    g[0] += 1e-12 * (B - A)
    g[-1] -= 1e-12 * (B - A)
    v = curve.jet(g, 0, check=False)[:, 0, axis]
    lo_v = np.minimum(v[:-1], v[1:])
    hi_v = np.maximum(v[:-1], v[1:])
    i0 = np.searchsorted(targets, lo_v, side="left")
    i1 = np.searchsorted(targets, hi_v, side="right")
    counts = i1 - i0
    if counts.sum() == 0:
        return np.zeros(0)
    cell = np.repeat(np.arange(n), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    tg = targets[np.repeat(i0, counts) + offs]
    a, b = g[cell].copy(), g[cell + 1].copy()
    fa = v[cell] - tg
    for _ in range(60):
        m = 0.5 * (a + b)
        fm = curve.jet(m, 0, check=False)[:, 0, axis] - tg
        left = np.sign(fm) == np.sign(fa)
        a = np.where(left, m, a)
        fa = np.where(left, fm, fa)
        b = np.where(left, b, m)
    return np.unique(0.5 * (a + b))


def _dyadic(p, q, toward_p, levels):
    """Dyadic pieces of ``[p, q]`` shrinking toward one end; level 0 is the outer half."""
    L = q - p
    k = np.arange(levels)
    inner, outer = L / 2.0 ** (k + 1), L / 2.0**k
    if toward_p:
        return p + inner, p + outer
    return q - outer, q - inner


def _tail(c):
    """Geometric extrapolation of the remaining terms of a dyadic sequence."""
    if c.size < 3:
        return math.inf
    a, b = abs(c[-2]), abs(c[-1])
    if b == 0:
        return 0.0
    rho = b / a if a > 0 else math.inf
    if not rho < 1:
        return math.inf
    return float(c[-1] * rho / (1 - rho))


def _weighted_integral(w, g, A, B, breaks, singular, quad, levels=24, max_levels=60):
    """``int_A^B w(t) g(t) dt`` with kinks at ``breaks`` and singular points ``singular``.

    Returns ``(value, error)``.  Raises :class:`AccuracyError` if a dyadic tail
    exceeds ``1e-3`` of the total.
    """
    if not B > A:
        return 0.0, 0.0
    sing = sorted({float(s) for s in singular if A <= s <= B})
    edges = np.unique(np.concatenate([[A, B], [b for b in breaks if A < b < B], sing]))
    regular_a, regular_b, seqs = [], [], []
    for p, q in zip(edges[:-1], edges[1:]):
        sp, sq = p in sing, q in sing
        if sp and sq:
            m = 0.5 * (p + q)
            seqs.append((p, m, True))
            seqs.append((m, q, False))
        elif sp:
            seqs.append((p, q, True))
        elif sq:
            seqs.append((p, q, False))
        else:
            regular_a.append(p)
            regular_b.append(q)

    def f(x, _):
        return w(x) * g(x)

    total, err = 0.0, 0.0
    if regular_a:
        vals, errs = _batch(f, np.array(regular_a), np.array(regular_b), quad)
        total += float(np.sum(vals))
        err += float(np.sum(errs))
    tails = []
    for p, q, toward in seqs:
        # stop where the pieces approach the resolution of the endpoint
        floor = 1e-11 * max(1.0, abs(p), abs(q))
        k = int(min(max_levels, max(levels, math.floor(math.log2(max((q - p) / floor, 2.0))))))
        a, b = _dyadic(p, q, toward, k)
        vals, errs = _batch(f, a, b, quad)
        tail = _tail(vals)
        total += float(vals.sum())
        err += float(errs.sum())
        tails.append(tail)
    for tail in tails:
        if math.isfinite(tail):
            total += tail
            err += abs(tail)
    bad = [t for t in tails if not math.isfinite(t) or abs(t) > 1e-3 * max(abs(total), 1e-300)]
    if bad and not (total == 0 and all(t == 0 for t in tails)):
        raise AccuracyError("weight singularity: dyadic tail did not settle", total, err)
    return total, err


def _batch(f, a, b, quad):
    try:
        return integrate_batch(f, a, b, quad)
    except AccuracyError as exc:
        vals, errs = integrate_batch(f, a, b, quad, raise_on_fail=False)
        raise AccuracyError("t-quadrature did not converge", float(np.sum(vals)), float(np.sum(errs))) from exc


def _range(curve, t_range):
    lo, hi = curve.domain
    if t_range is not None:
        lo, hi = max(lo, float(t_range[0])), min(hi, float(t_range[1]))
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise InputError("integration needs a finite t-range; restrict the curve or pass t_range")
    return lo, hi


def _open_ends(curve, A, B):
    lo, hi = curve.domain
    out = []
    if A == lo:
        out.append(A)
    if B == hi:
        out.append(B)
    return out


def _support(curve, lo_v, hi_v, A, B, n=4096):
    """Sub-interval of ``[A, B]`` outside which ``gamma(t)`` leaves the box ``[lo_v, hi_v]``."""
    g = np.linspace(A, B, n + 1)
    gi = g.copy()
    gi[0] += 1e-12 * (B - A)
    gi[-1] -= 1e-12 * (B - A)
    pts = curve.jet(gi, 0, check=False)[:, 0, :]
    # a cell is active if the chord bounding box, padded by the cell variation, meets the box
    c_lo = np.minimum(pts[:-1], pts[1:])
    c_hi = np.maximum(pts[:-1], pts[1:])
    pad = c_hi - c_lo
    active = np.all((c_hi + pad >= lo_v) & (c_lo - pad <= hi_v), axis=1)
    idx = np.flatnonzero(active)
    if idx.size == 0:
        return None
    return float(g[max(idx[0] - 1, 0)]), float(g[min(idx[-1] + 2, n)])


def _as_quad(quad):
    if quad is None:
        return QuadOpts()
    return QuadOpts.from_dict(quad) if isinstance(quad, dict) else quad


def pairing(curve, E, F, w=None, quad=None, t_range=None, return_error=False):
    """``<T chi_E, chi_F> = int w(t) vol((E + gamma(t)) ∩ F) dt``.

    Parameters
    ----------
    curve : Curve
    E, F : IndicatorSet
        Sets in ``R^d``.
    w : WeightSpec, default affine
    quad : QuadOpts
    t_range : (float, float), optional
        Restricts the parameter interval; needed for unbounded domains.
    """
    w = WeightSpec("affine") if w is None else w
    quad = _as_quad(quad)
    w.validate(curve)
    d = curve.dim
    if E.dim != d or F.dim != d:
        raise InputError(f"sets must live in R^{d}")
    if E.is_empty or F.is_empty:
        return (0.0, 0.0) if return_error else 0.0
    Ec, Fc = E.canonicalize().boxes, F.canonicalize().boxes
    A, B = _range(curve, t_range)
    (elo, ehi), (flo, fhi) = E.bounding_box(), F.bounding_box()
    sup = _support(curve, flo - ehi, fhi - elo, A, B)
    if sup is None:
        return (0.0, 0.0) if return_error else 0.0
    A2, B2 = max(A, sup[0]), min(B, sup[1])
    breaks = []
    for i in range(d):
        edges = np.concatenate([
            (Fc[:, None, i, j] - Ec[None, :, i, k]).ravel() for j in (0, 1) for k in (0, 1)
        ])
        breaks.append(_crossings(curve, i, edges, A2, B2))
    breaks = np.concatenate(breaks)

    def g(t):
        return overlap_volume(Ec, Fc, curve.jet(t, 0, check=False)[:, 0, :])

    singular = _open_ends(curve, A2, B2) + w.singular_points(curve)
    val, err = _weighted_integral(w.evaluator(curve, A, B), g, A2, B2, breaks, singular, quad)
    return (val, err) if return_error else val


def adjoint_pairing(curve, E, F, w=None, quad=None, t_range=None):
    """``<chi_E, T* chi_F>`` with ``T* chi_F(y) = int chi_F(y + gamma(t)) w(t) dt``.

    Evaluated through the reflected sets, ``T* chi_F(y) = T chi_{-F}(-y)``, so
    the breakpoints and quadrature are computed independently of
    :func:`pairing`.
    """
    return pairing(curve, F.reflect(), E.reflect(), w, quad, t_range)


def apply_pointwise(curve, E, x, w=None, quad=None, t_range=None):
    """``T chi_E(x) = int chi_E(x - gamma(t)) w(t) dt``."""
    w = WeightSpec("affine") if w is None else w
    quad = _as_quad(quad)
    w.validate(curve)
    x = np.asarray(x, dtype=float)
    if E.dim != curve.dim or x.shape != (curve.dim,):
        raise InputError("dimension mismatch")
    if E.is_empty:
        return 0.0
    Ec = E.canonicalize()
    A, B = _range(curve, t_range)
    elo, ehi = Ec.bounding_box()
    sup = _support(curve, x - ehi, x - elo, A, B)
    if sup is None:
        return 0.0
    A2, B2 = max(A, sup[0]), min(B, sup[1])
    breaks = np.concatenate([
        _crossings(curve, i, np.concatenate([x[i] - Ec.boxes[:, i, 0], x[i] - Ec.boxes[:, i, 1]]), A2, B2)
        for i in range(curve.dim)
    ])

    def g(t):
        return Ec.contains(x[None, :] - curve.jet(t, 0, check=False)[:, 0, :]).astype(float)

    singular = _open_ends(curve, A2, B2) + w.singular_points(curve)
    val, _ = _weighted_integral(w.evaluator(curve, A, B), g, A2, B2, breaks, singular, quad)
    return val


# ---------------------------------------------------------------------------
# restricted X-ray transform


def _line_volume(Gb, Hb, t, gam):
    """``int_{x in H_t} int_s chi_G(s, x + s gamma(t)) ds dx`` for every node, exactly.

    For a box pair the inner integrand is a product of ``d`` piecewise linear
    overlaps in ``s``; Gauss-Legendre with enough nodes on each piece between
    the breakpoints integrates it exactly.
    """
    N = t.size
    d = gam.shape[1]
    out = np.zeros(N)
    if Gb.shape[0] == 0 or Hb.shape[0] == 0:
        return out
    ig, ih = np.meshgrid(np.arange(Gb.shape[0]), np.arange(Hb.shape[0]), indexing="ij")
    ig, ih = ig.ravel(), ih.ravel()
    xg, wg = np.polynomial.legendre.leggauss(d // 2 + 1)
    P = ig.size
    chunk = max(1, 200_000 // P)
    for c0 in range(0, N, chunk):
        tt, gg = t[c0 : c0 + chunk], gam[c0 : c0 + chunk]
        n = tt.size
        live = (Hb[ih, 0, 0][None, :] <= tt[:, None]) & (tt[:, None] < Hb[ih, 0, 1][None, :])
        s_lo = np.broadcast_to(Gb[ig, 0, 0], (n, P))
        s_hi = np.broadcast_to(Gb[ig, 0, 1], (n, P))
        bps = [s_lo, s_hi]
        with np.errstate(divide="ignore", invalid="ignore"):
            for i in range(d):
                gi = gg[:, i : i + 1]
                for ge in (Gb[ig, i + 1, 0], Gb[ig, i + 1, 1]):
                    for he in (Hb[ih, i + 1, 0], Hb[ih, i + 1, 1]):
                        b = (ge - he)[None, :] / gi
                        bps.append(np.where(np.isfinite(b), np.clip(b, s_lo, s_hi), s_lo))
        bp = np.sort(np.stack(bps, axis=-1), axis=-1)  # (n, P, m)
        a, b = bp[..., :-1], bp[..., 1:]
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        total = np.zeros((n, P))
        for xk, wk in zip(xg, wg):
            s = mid + half * xk
            prod = np.ones_like(s)
            for i in range(d):
                gi = gg[:, i][:, None, None]
                lo = np.maximum(Hb[ih, i + 1, 0][None, :, None], Gb[ig, i + 1, 0][None, :, None] - s * gi)
                hi = np.minimum(Hb[ih, i + 1, 1][None, :, None], Gb[ig, i + 1, 1][None, :, None] - s * gi)
                prod *= np.clip(hi - lo, 0.0, None)
            total += np.sum(wk * half * prod, axis=-1)
        out[c0 : c0 + chunk] = np.sum(np.where(live, total, 0.0), axis=1)
    return out


def xray_pairing(curve, G, H, exponent=None, quad=None):
    """``<lambda(t)^{1/s} X_gamma chi_G, chi_H>`` with ``X_gamma chi_G(t, x) = int chi_G(s, x + s gamma(t)) ds``.

    ``G`` and ``H`` live in ``R^{1+d}``; the first coordinate of ``G`` is ``s``
    and of ``H`` is ``t``.  ``exponent`` defaults to ``s_d = (d + 2) / d``.
    The ``(s, x)`` integral is exact for every ``t``; the ``t`` integral is
    adaptive with breakpoints at the ``t``-edges of ``H``.
    """
    quad = _as_quad(quad)
    d = curve.dim
    if G.dim != d + 1 or H.dim != d + 1:
        raise InputError(f"sets must live in R^{d + 1}")
    if G.is_empty or H.is_empty:
        return 0.0
    s_exp = float(ExponentPair.xray_endpoint(d).q if exponent is None else exponent)
    Gb, Hb = G.canonicalize().boxes, H.canonicalize().boxes
    lo, hi = curve.domain
    A = max(lo, float(Hb[:, 0, 0].min()))
    B = min(hi, float(Hb[:, 0, 1].max()))
    if not B > A:
        return 0.0
    breaks = np.unique(Hb[:, 0, :])
    expo = 2.0 / (d * (d + 1)) / s_exp

    def w(t):
        jet = curve.jet(t, d, check=False)
        return np.abs(np.linalg.det(jet[..., 1:, :])) ** expo

    def g(t):
        return _line_volume(Gb, Hb, t, curve.jet(t, 0, check=False)[:, 0, :])

    val, _ = _weighted_integral(w, g, A, B, breaks, _open_ends(curve, A, B), quad)
    return val


# ---------------------------------------------------------------------------
# restricted weak-type quantities


@dataclass
class RwtDiagnostics:
    """``alpha = Lambda / |F|``, ``beta = Lambda / |E|``, ``slack = |F| / (beta^d alpha^{(d^2 - d) / 2})``."""

    Lambda: float
    alpha: float
    beta: float
    slack: float

    def to_dict(self):
        return {k: (v if math.isfinite(v) else None) for k, v in self.__dict__.items()}


def _check_measures(mE, mF):
    if not (mE > 0 and mF > 0):
        raise InputError("set measures must be positive")


def rwt_ratio(Lam, measE, measF, pq):
    """``Lambda / (|E|^{1/p} |F|^{1 - 1/q})``."""
    _check_measures(measE, measF)
    return float(Lam) / (measE ** (1.0 / float(pq.p)) * measF ** (1.0 - 1.0 / float(pq.q)))


def rwt_diagnostics(Lam, measE, measF, d):
    """The quantities ``alpha``, ``beta`` and ``slack``; ``slack`` is infinite if ``Lambda = 0``."""
    _check_measures(measE, measF)
    alpha, beta = Lam / measF, Lam / measE
    if Lam <= 0:
        return RwtDiagnostics(float(Lam), alpha, beta, math.inf)
    log_slack = math.log(measF) - d * math.log(beta) - (d * d - d) / 2 * math.log(alpha)
    return RwtDiagnostics(float(Lam), alpha, beta, math.exp(log_slack))


# ---------------------------------------------------------------------------
# Knapp examples


def knapp_scales(curve, t0, delta):
    """``scale_i = sum_{m <= i} |gamma_i^{(m)}(t0)| delta^m / m!`` (``delta^i`` if that vanishes)."""
    d = curve.dim
    jet = curve.jet(np.array([t0]), d)[0]
    scales = np.empty(d)
    for i in range(d):
        s = sum(abs(jet[m, i]) * delta**m / math.factorial(m) for m in range(1, i + 2))
        scales[i] = s if s > 0 else delta ** (i + 1)
    return scales


def _segment_boxes(curve, t0, delta, n_seg, samples=17):
    """Bounding boxes of ``gamma`` over ``n_seg`` equal pieces of ``[t0, t0 + delta]``."""
    edges = np.linspace(t0, t0 + delta, n_seg + 1)
    out = []
    lo_d, hi_d = curve.domain
    for a, b in zip(edges[:-1], edges[1:]):
        t = np.linspace(a, b, samples)
        t = t[(t > lo_d) & (t < hi_d)]
        p = curve.eval(t)
        out.append(np.stack([p.min(axis=0), p.max(axis=0)], axis=-1))
    return np.array(out)


def knapp_pair(curve, t0, delta, h, n_seg=8, max_boxes=100_000):
    """Knapp-type sets ``E`` (a thickened arc) and ``F`` (``E + gamma(arc)``).

    ``E`` covers ``{gamma(t) + u : t in [t0, t0 + delta], |u_i| <= h scale_i}``
    and ``F`` covers ``E + gamma([t0, t0 + delta])``, both as canonical box
    unions built from per-segment bounding boxes.

    Raises
    ------
    ResolutionError
        If a covering needs more than ``max_boxes`` boxes.
    """
    lo, hi = curve.domain
    t0, delta, h = float(t0), float(delta), float(h)
    if not (h > 0 and delta > 0):
        raise InputError("need h > 0 and delta > 0")
    if not (lo <= t0 and t0 + delta <= hi):
        raise InputError("[t0, t0 + delta] must lie in the curve domain")
    scales = knapp_scales(curve, t0 if curve.contains(t0) else t0 + 1e-9 * delta, delta)
    pad = h * scales
    n_seg = int(n_seg)
    seg = _segment_boxes(curve, t0, delta, n_seg)
    Eraw = seg.copy()
    Eraw[:, :, 0] -= pad
    Eraw[:, :, 1] += pad
    E = box_union(Eraw)
    if len(E) > max_boxes:
        raise ResolutionError(f"E needs {len(E)} boxes")
    Fraw = (E.boxes[:, None, :, :] + seg[None, :, :, :]).reshape(-1, curve.dim, 2)
    if Fraw.shape[0] > 20 * max_boxes:
        raise ResolutionError(f"F would need more than {max_boxes} boxes")
    F = box_union(Fraw)
    if len(F) > max_boxes:
        raise ResolutionError(f"F needs {len(F)} boxes")
    return E, F
