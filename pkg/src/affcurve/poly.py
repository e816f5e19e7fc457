"""Polynomial torsion, its zeros, comparability pieces and exponent regions.

For a polynomial curve the torsion is itself a polynomial and is computed
exactly (up to floating point) by cofactor expansion over
:class:`numpy.polynomial.Polynomial`.  Its zeros come from companion-matrix
eigenvalues, grouped into multiple roots and polished by Newton's method on
the appropriate derivative.

:func:`decompose` splits an interval into pieces on which
``|L(t)| ~ C |t - a|^k`` with ``a`` the nearest point of a given root set.
Within the Voronoi cell of ``a`` each root ``z_i`` satisfies
``|t - z_i| ~ max(|t - a|, |z_i - a|)`` up to a factor 2, so cutting the cell
at ``a +- |z_i - a|`` leaves a single monomial profile on every piece.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numpy.polynomial import Polynomial

from .curves import MonomialCurve, PolynomialCurve
from .errors import DegenerateCurveError, InputError
from .operators import ExponentPair

__all__ = [
    "DecompositionPiece",
    "ExponentRegion",
    "as_polynomial_curve",
    "poly_torsion",
    "roots_with_multiplicity",
    "real_parts_of_roots",
    "decompose",
    "verify_comparability",
    "exponent_region",
]

DEDUP_TOL = 1e-10
_CLUSTER_TOL = 0.05


def _trim(p):
    c = np.trim_zeros(np.asarray(p.coef, dtype=float), "b")
    return Polynomial(c if c.size else [0.0])


def as_polynomial_curve(curve):
    """``curve`` as a :class:`PolynomialCurve` (monomial curves with integer exponents convert)."""
    if isinstance(curve, PolynomialCurve):
        return curve
    if isinstance(curve, MonomialCurve):
        a = curve.exponents
        if np.all(a == np.round(a)) and np.all(a >= 0):
            rows = []
            for ai, ci in zip(a.astype(int), curve.coeffs):
                r = np.zeros(ai + 1)
                r[ai] = ci
                rows.append(r)
            return PolynomialCurve(rows, curve.domain)
    raise InputError("a polynomial curve is required")


def _det(mat):
    n = len(mat)
    if n == 1:
        return mat[0][0]
    out = Polynomial([0.0])
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in mat[1:]]
        term = mat[0][j] * _det(minor)
        out = out + term if j % 2 == 0 else out - term
    return out


def poly_torsion(curve):
    """``L = det(gamma', ..., gamma^(d))`` as a :class:`~numpy.polynomial.Polynomial`."""
    comps = as_polynomial_curve(curve).component_polys()
    d = len(comps)
    # row m holds the (m+1)-th derivatives of all components
    mat = [[c.deriv(m + 1) for c in comps] for m in range(d)]
    return _trim(_det(mat))


def _scale(p, z):
    return float(np.sum(np.abs(p.coef) * np.abs(z) ** np.arange(p.coef.size)))


def _polish(p, z, m, steps=8):
    """Newton on ``p^(m-1)``, where an ``m``-fold root of ``p`` is simple."""
    q = p.deriv(m - 1) if m > 1 else p
    dq = q.deriv()
    for _ in range(steps):
        den = dq(z)
        if den == 0:
            break
        dz = q(z) / den
        z = z - dz
        if abs(dz) <= 1e-16 * max(1.0, abs(z)):
            break
    return z


def _linkage_groups(z, tol):
    """Single-linkage groups of points closer than ``tol * max(1, |z|)``."""
    parent = list(range(z.size))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(z.size):
        for j in range(i + 1, z.size):
            if abs(z[i] - z[j]) <= tol * max(1.0, abs(z[i])):
                parent[find(i)] = find(j)
    groups = {}
    for i in range(z.size):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _resolve(p, z, tol):
    out = []
    for g in _linkage_groups(z, tol):
        m = len(g)
        c = complex(np.mean(z[g]))
        if abs(c.imag) <= 1e-12 * max(1.0, abs(c)):
            c = complex(c.real, 0.0)
        zp = complex(_polish(p, c, m))
        if m > 1 and abs(p(zp)) > 1e-12 * _scale(p, zp):
            out.extend(_resolve(p, z[g], tol / 10) if tol > 1e-8 else
                       [(complex(_polish(p, z[i], 1)), 1) for i in g])
            continue
        out.append((zp, m))
    return out


def roots_with_multiplicity(p):
    """``[(root, multiplicity), ...]`` of a nonzero polynomial; multiplicities sum to the degree.

    Companion eigenvalues are grouped by single linkage; a group of size ``m``
    is accepted as one ``m``-fold root if Newton on ``p^(m-1)`` from the group
    mean lands on a zero of ``p``, and is regrouped at a finer radius otherwise.
    """
    p = _trim(p)
    if np.all(p.coef == 0):
        raise InputError("the zero polynomial has no finite root set")
    if p.degree() == 0:
        return []
    raw = np.asarray(p.roots(), dtype=complex)
    return sorted(_resolve(p, raw, _CLUSTER_TOL), key=lambda e: (e[0].real, e[0].imag))


def real_parts_of_roots(p, tol=DEDUP_TOL):
    """Sorted real parts of all complex roots of ``p``, deduplicated at ``tol`` (relative).

    Within a group of near-equal values a real root wins over the real part
    of a complex pair.
    """
    items = sorted((z.real, z.imag != 0) for z, _ in roots_with_multiplicity(p))
    groups = []
    for x, cplx in items:
        if groups and abs(x - groups[-1][-1][0]) <= tol * max(1.0, abs(x)):
            groups[-1].append((x, cplx))
        else:
            groups.append([(x, cplx)])
    return np.array([min(g, key=lambda e: e[1])[0] for g in groups], dtype=float)


def _snap(values, tol=DEDUP_TOL):
    """Merge near-equal nonnegative values; tiny ones become 0."""
    out = {}
    reps = []
    for v in sorted(values):
        if v <= tol:
            out[v] = 0.0
        elif reps and v - reps[-1] <= tol * max(1.0, v):
            out[v] = reps[-1]
        else:
            reps.append(v)
            out[v] = v
    return out


@dataclass
class DecompositionPiece:
    """``|L(t)| ~ C |t - anchor|^k`` on ``interval``; ``factor`` is the sampled worst ratio."""

    interval: tuple
    anchor: float
    k: int
    C: float
    factor: float = None
    profiles: list = field(default_factory=list, repr=False)

    def to_dict(self):
        lo, hi = self.interval
        return {
            "interval": [lo if math.isfinite(lo) else None, hi if math.isfinite(hi) else None],
            "anchor": self.anchor,
            "k": self.k,
            "C": self.C,
            "factor": self.factor if self.factor is None or math.isfinite(self.factor) else None,
        }


def _profile(roots, lc, s, level):
    """``|lc| prod_{rho_i <= level} s^m_i prod_{rho_i > level} rho_i^m_i``."""
    k = sum(m for r, m in roots if r <= level)
    C = abs(lc) * math.prod(r**m for r, m in roots if r > level)
    return k, C, C * s**k


def decompose(L, Z, region, verify_n=1000):
    """Comparability pieces of ``L`` over ``region``.

    Parameters
    ----------
    L : Polynomial
    Z : array_like
        Sorted reals containing the real parts of every root of ``L``.
    region : (float, float)
        May be unbounded; the outermost piece then has ``k = deg L`` and
        ``C = |leading coefficient|``.
    verify_n : int
        Samples per piece used to fill :attr:`DecompositionPiece.factor`; 0 skips it.

    Returns
    -------
    list of DecompositionPiece
    """
    L = _trim(L)
    if np.all(L.coef == 0):
        raise DegenerateCurveError("torsion vanishes identically")
    lo, hi = float(region[0]), float(region[1])
    if not hi > lo:
        raise InputError("region must satisfy lo < hi")
    Z = np.sort(np.asarray(Z, dtype=float).ravel())
    roots = roots_with_multiplicity(L)
    lc = float(L.coef[-1])
    for z, _ in roots:
        if Z.size == 0 or np.min(np.abs(Z - z.real)) > 1e-8 * max(1.0, abs(z.real)):
            raise InputError(f"Z must contain the real part {z.real!r} of every root")
    if Z.size == 0:
        return [_finish(DecompositionPiece((lo, hi), None, 0, abs(lc)), L, verify_n)]

    mids = 0.5 * (Z[:-1] + Z[1:])
    cell_lo = np.concatenate([[-math.inf], mids])
    cell_hi = np.concatenate([mids, [math.inf]])
    pieces = []
    for a, clo, chi in zip(Z, cell_lo, cell_hi):
        p, q = max(lo, clo), min(hi, chi)
        if not q > p:
            continue
        rho = [(abs(z - a), m) for z, m in roots]
        snap = _snap([r for r, _ in rho])
        rho = [(snap[r], m) for r, m in rho]
        levels = sorted({r for r, _ in rho if r > 0})
        cuts = [c for r in levels for c in (a - r, a + r) if p < c < q]
        edges = [p] + sorted(set(cuts)) + [q]
        for u, v in zip(edges[:-1], edges[1:]):
            s_lo = 0.0 if u <= a <= v else min(abs(u - a), abs(v - a))
            k, C, _ = _profile(rho, lc, 1.0, s_lo * (1 + 1e-12))
            piece = DecompositionPiece((float(u), float(v)), float(a), int(k), float(C))
            _check_dominance(piece, rho, lc, levels)
            pieces.append(_finish(piece, L, verify_n))
    return pieces


def _midpoint_distance(piece):
    u, v = piece.interval
    a = piece.anchor
    if math.isinf(u) or math.isinf(v):
        finite = v if math.isinf(u) else u
        t = finite + (1.0 + abs(finite)) * (1.0 if math.isinf(v) else -1.0)
    else:
        t = 0.5 * (u + v)
    return abs(t - a)


def _check_dominance(piece, rho, lc, levels):
    s = _midpoint_distance(piece)
    chosen = piece.C * s**piece.k
    cands = [_profile(rho, lc, s, lev)[2] for lev in [0.0] + levels]
    piece.profiles = cands
    assert all(chosen >= c * (1 - 1e-9) for c in cands), "selected profile is not dominant"


def _finish(piece, L, n):
    if n:
        piece.factor = float(verify_comparability([piece], L, n)[0])
    return piece


def _van_der_corput(n):
    """First ``n`` terms (from index 1) of the base-2 van der Corput sequence; prefixes nest."""
    i = np.arange(1, n + 1)
    out = np.zeros(n)
    denom = 1.0
    while np.any(i):
        denom *= 2.0
        out += (i & 1) / denom
        i >>= 1
    return out


def _samples(interval, anchor, n):
    u, v = interval
    x = _van_der_corput(n)
    if math.isinf(u) and math.isinf(v):
        c = 0.0 if anchor is None else anchor
        y = 2.0 * x - 1.0
        return c + y / (1.0 - np.abs(y))
    if math.isinf(v):
        return u + (1.0 + abs(u)) * x / (1.0 - x)
    if math.isinf(u):
        return v - (1.0 + abs(v)) * x / (1.0 - x)
    return u + (v - u) * x


def verify_comparability(pieces, L, n=1000):
    """Worst ``max(|L| / (C |t - a|^k), C |t - a|^k / |L|)`` over ``n`` samples per piece.

    Samples follow the van der Corput sequence, so raising ``n`` only adds
    points and never lowers a factor.  A sample where exactly one side
    vanishes yields ``inf`` (for ``k = 0`` this flags a zero inside the piece).
    Samples where both ``|L|`` and the model are below the rounding-error
    bound of evaluating ``L`` from its coefficients (near high-multiplicity
    roots) are skipped, since the computed value carries no information there.
    """
    L = _trim(L)
    absL = Polynomial(np.abs(L.coef))
    unit = 2 * (L.degree() + 1) * np.finfo(float).eps
    out = []
    for piece in pieces:
        t = _samples(piece.interval, piece.anchor, int(n))
        lv = np.abs(L(t))
        dist = np.ones_like(t) if piece.anchor is None else np.abs(t - piece.anchor)
        model = piece.C * dist ** piece.k
        both_zero = (lv == 0) & (model == 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.maximum(lv / model, model / lv)
        r = np.where(both_zero, 1.0, r)
        resolved = both_zero | (np.maximum(lv, model) > unit * absL(np.abs(t)))
        out.append(float(np.max(r[resolved])) if np.any(resolved) else 1.0)
    return out


@dataclass(frozen=True)
class ExponentRegion:
    """Vertices ``(1/p, 1/q)`` of the exponent region of a polynomial curve."""

    d: int
    N_loc: int
    N_glob: int
    theta_loc: Fraction
    theta_glob: Fraction
    vertices: tuple

    def distinct_vertices(self):
        return tuple(dict.fromkeys(self.vertices))

    def to_dict(self):
        return {
            "d": self.d,
            "N_loc": self.N_loc,
            "N_glob": self.N_glob,
            "theta_loc": str(self.theta_loc),
            "theta_glob": str(self.theta_glob),
            "vertices": [[str(x), str(y)] for x, y in self.vertices],
            "vertices_float": [[float(x), float(y)] for x, y in self.vertices],
            "distinct_vertices": [[str(x), str(y)] for x, y in self.distinct_vertices()],
        }


def _theta(N, d):
    return 1 / (1 + Fraction(2 * N, d * (d + 1)))


def exponent_region(curve):
    """``theta = (1 + 2N / (d (d + 1)))^{-1}`` for local and global ``N`` and the four vertices.

    ``N_loc`` is the largest multiplicity of a real zero of the torsion and
    ``N_glob`` its degree.

    Raises
    ------
    DegenerateCurveError
        If the torsion vanishes identically.
    """
    pc = as_polynomial_curve(curve)
    L = poly_torsion(pc)
    if np.all(L.coef == 0):
        raise DegenerateCurveError("torsion vanishes identically")
    d = pc.dim
    real = [m for z, m in roots_with_multiplicity(L) if z.imag == 0]
    N_loc = max(real, default=0)
    N_glob = L.degree()
    tl, tg = _theta(N_loc, d), _theta(N_glob, d)
    pd = ExponentPair.convolution_endpoint(d)
    ip, iq = 1 / pd.p, 1 / pd.q
    verts = (
        (tl * ip, tl * iq),
        (tg * ip, tg * iq),
        (1 - tl * iq, 1 - tl * ip),
        (1 - tg * iq, 1 - tg * ip),
    )
    return ExponentRegion(d, int(N_loc), int(N_glob), tl, tg, verts)
