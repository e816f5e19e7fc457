"""Affine invariants of curves: torsions, affine density, ratio functions,
Jacobians and the affine arclength parametrization.

Conventions
-----------
``L^j`` is the torsion of the first ``j`` coordinates, with ``L^0 = L^{-1} = 1``.
The Jacobian is always reported as ``det(gamma'(t_1), ..., gamma'(t_d))`` with
columns in the order given; alternating-sign sum maps only change its sign.
"""

import csv
import io
import math

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import AccuracyError, InputError, OrderError, RangeError, SingularTorsionError
from .quadrature import QuadOpts, integrate_batch

__all__ = [
    "torsion",
    "torsion_table",
    "affine_density",
    "ratio_functions",
    "jacobian_direct",
    "jacobian_recursive",
    "check_nonvanishing",
    "TorsionProfile",
    "torsion_profile",
    "cumulative_arclength",
    "ArclengthParam",
]


def torsion_table(curve, t, check=True):
    """``L^1, ..., L^d`` at every parameter; shape ``t.shape + (d,)``."""
    t = np.asarray(t, dtype=float)
    d = curve.dim
    jet = curve.jet(t, d, check=check)
    out = np.empty(t.shape + (d,))
    for j in range(1, d + 1):
        # rows: derivative orders 1..j, columns: components 1..j
        out[..., j - 1] = np.linalg.det(jet[..., 1 : j + 1, :j])
    return out


def _level(table, j):
    """``L^j`` from a torsion table, honouring ``L^0 = L^{-1} = 1``."""
    if j <= 0:
        return np.ones(table.shape[:-1])
    return table[..., j - 1]


def torsion(curve, t, j=None):
    """Torsion ``L^j`` of the first ``j`` coordinates at ``t``.

    Parameters
    ----------
    curve : Curve
    t : float or array_like
    j : int, optional
        ``1..d``; defaults to ``d``.  ``j <= 0`` returns 1 by convention.
    """
    d = curve.dim
    j = d if j is None else int(j)
    if j < -1 or j > d:
        raise InputError(f"torsion index {j} not in -1..{d}")
    t = np.asarray(t, dtype=float)
    curve.check_domain(t)
    if j <= 0:
        out = np.ones(t.shape)
    else:
        jet = curve.jet(t, j)
        out = np.linalg.det(jet[..., 1 : j + 1, :j])
    return float(out) if out.ndim == 0 else out


def affine_density(curve, t):
    """``lambda(t) = |L(t)|^{2 / (d (d + 1))}``."""
    d = curve.dim
    L = np.asarray(torsion(curve, t, d))
    out = np.abs(L) ** (2.0 / (d * (d + 1)))
    return float(out) if out.ndim == 0 else out


def _density_values(curve, t):
    d = curve.dim
    jet = curve.jet(t, d, check=False)
    return np.abs(np.linalg.det(jet[..., 1:, :])) ** (2.0 / (d * (d + 1)))


def ratio_functions(curve, t, k):
    """The ratios ``(A^k, B^k)`` at ``t``.

    ``A^k = L^{d-k-1} L^{d-k+1} / (L^{d-k})^2`` and
    ``B^k = L (L^{d-k-1})^k (L^{d-k})^{-(k+1)}``.

    Raises
    ------
    SingularTorsionError
        If ``L^{d-k}`` vanishes at some ``t``; ``err.j`` is ``d - k``.
    """
    d = curve.dim
    if not 1 <= k <= d:
        raise InputError(f"k must lie in 1..{d}")
    t = np.asarray(t, dtype=float)
    curve.check_domain(t)
    tab = torsion_table(curve, t)
    den = _level(tab, d - k)
    if np.any(den == 0):
        bad = float(np.ravel(t)[np.flatnonzero(np.ravel(den) == 0)[0]])
        raise SingularTorsionError(d - k, bad)
    lo = _level(tab, d - k - 1)
    A = lo * _level(tab, d - k + 1) / den**2
    B = tab[..., d - 1] * lo**k / den ** (k + 1)
    if A.ndim == 0:
        return float(A), float(B)
    return A, B


def jacobian_direct(curve, params):
    """``det(gamma'(t_1), ..., gamma'(t_d))``, columns in the given order.

    ``params`` may be a single ``d``-tuple or an array of shape ``(M, d)``.
    """
    T = np.asarray(params, dtype=float)
    d = curve.dim
    if T.shape[-1] != d:
        raise InputError(f"need {d} parameters per tuple")
    curve.check_domain(T)
    vel = curve.jet(T, 1)[..., 1, :]  # (..., d_tuple, d_space)
    out = np.linalg.det(np.swapaxes(vel, -1, -2))
    return float(out) if out.ndim == 0 else out


def check_nonvanishing(curve, a, b, levels=None, n=64):
    """Raise :class:`SingularTorsionError` if some ``L^j`` vanishes on ``[a, b]``.

    Samples 64 Chebyshev points (plus the endpoints) and bisects any sign
    change to locate the zero.
    """
    d = curve.dim
    levels = range(1, d + 1) if levels is None else levels
    k = np.arange(n)
    x = 0.5 * (a + b) + 0.5 * (b - a) * np.cos(np.pi * (2 * k + 1) / (2 * n))
    x = np.concatenate([[a], np.sort(x), [b]])
    tab = torsion_table(curve, x)
    for j in levels:
        v = tab[:, j - 1]
        zero = np.flatnonzero(v == 0)
        if zero.size:
            raise SingularTorsionError(j, float(x[zero[0]]))
        flip = np.flatnonzero(np.sign(v[:-1]) != np.sign(v[1:]))
        if flip.size:
            lo, hi = x[flip[0]], x[flip[0] + 1]
            s_lo = np.sign(v[flip[0]])
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if mid <= lo or mid >= hi:
                    break
                s = np.sign(torsion(curve, mid, j))
                if s == 0:
                    lo = hi = mid
                    break
                if s == s_lo:
                    lo = mid
                else:
                    hi = mid
            raise SingularTorsionError(j, 0.5 * (lo + hi))


def _jk(curve, k, T, opts):
    """The recursive Jacobian ``J^k`` at the ordered rows of ``T`` (shape ``(M, k)``)."""
    d = curve.dim
    tab = torsion_table(curve, T, check=False)
    Ak = _level(tab, d - k - 1) * _level(tab, d - k + 1) / _level(tab, d - k) ** 2
    pref = np.prod(Ak, axis=-1)
    if k == 1:
        return pref
    # integrate J^{k-1} over prod_i [t_i, t_{i+1}], one axis at a time
    return pref * _nested(curve, k - 1, T[:, :-1], T[:, 1:], opts)


def _nested(curve, kk, lo, hi, opts):
    """Integral of ``J^{kk}`` over the boxes ``prod [lo, hi]`` (``(M, kk)`` each)."""

    def integrate(prefix, lo_rest, hi_rest, level_opts):
        # prefix: (N, p) fixed leading coordinates; lo_rest/hi_rest: (N, m)
        m = lo_rest.shape[1]
        inner_opts = level_opts.scaled(1.0 / 3.0)

        def f(x, owner):
            pts = np.column_stack([prefix[owner], x])
            if m == 1:
                return _jk(curve, kk, pts, inner_opts)
            return integrate(pts, lo_rest[owner, 1:], hi_rest[owner, 1:], inner_opts)

        vals, _ = integrate_batch(f, lo_rest[:, 0], hi_rest[:, 0], level_opts)
        return vals

    return integrate(np.zeros((lo.shape[0], 0)), lo, hi, opts)


def jacobian_recursive(curve, params, quad=QuadOpts()):
    """Evaluate ``J^d`` by the recursion ``J^k = prod A^k(t_i) * int J^{k-1}``.

    The base case is ``J^1 = A^1``.  The inner integral runs over the box
    ``[t_1, t_2] x ... x [t_{k-1}, t_k]``.  The result equals
    :func:`jacobian_direct` for increasing tuples.

    Parameters
    ----------
    curve : Curve
    params : sequence of d floats, or array ``(M, d)``
        Strictly increasing tuples.
    quad : QuadOpts
        Tolerances of the outermost level; each nested level divides them by 3.

    Raises
    ------
    OrderError
        Unordered tuple or ties.
    SingularTorsionError
        Some ``L^j`` changes sign or vanishes on ``[t_1, t_d]``.
    AccuracyError
        Quadrature did not converge; carries the estimate.
    """
    if isinstance(quad, dict):
        quad = QuadOpts.from_dict(quad)
    T = np.asarray(params, dtype=float)
    single = T.ndim == 1
    T = np.atleast_2d(T)
    d = curve.dim
    if T.shape[1] != d:
        raise InputError(f"need {d} parameters per tuple")
    curve.check_domain(T)
    if np.any(np.diff(T, axis=1) <= 0):
        raise OrderError("jacobian_recursive needs strictly increasing parameters (ties are rejected)")
    for row in T:
        check_nonvanishing(curve, row[0], row[-1])
    try:
        out = _jk(curve, d, T, quad)
    except AccuracyError as exc:
        raise AccuracyError("recursive Jacobian quadrature did not converge", exc.estimate, exc.error) from exc
    return float(out[0]) if single else out


# ---------------------------------------------------------------------------
# profiles and arclength


class TorsionProfile:
    """Torsions ``L^1..L^d`` and ``lambda`` on an increasing grid."""

    def __init__(self, t, L, lam):
        self.t = np.asarray(t, dtype=float)
        self.L = np.asarray(L, dtype=float)
        self.lam = np.asarray(lam, dtype=float)
        if np.any(np.diff(self.t) <= 0):
            raise InputError("profile grid must be strictly increasing")

    @property
    def dim(self):
        return self.L.shape[1]

    def rows(self):
        for i in range(self.t.size):
            yield [float(self.t[i]), *map(float, self.L[i]), float(self.lam[i])]

    def header(self):
        return ["t", *[f"L{j}" for j in range(1, self.dim + 1)], "lambda"]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        for r in self.rows():
            w.writerow([repr(v) for v in r])
        return buf.getvalue()

    def to_dict(self):
        return {"t": self.t.tolist(), "L": self.L.tolist(), "lambda": self.lam.tolist()}


def torsion_profile(curve, grid):
    """Tabulate ``L^1..L^d`` and ``lambda`` on an increasing grid."""
    t = np.asarray(grid, dtype=float)
    if t.ndim != 1:
        raise InputError("grid must be one-dimensional")
    curve.check_domain(t)
    L = torsion_table(curve, t)
    d = curve.dim
    lam = np.abs(L[:, -1]) ** (2.0 / (d * (d + 1)))
    return TorsionProfile(t, L, lam)


def _closed_check(curve, *ts):
    lo, hi = curve.domain
    for t in ts:
        if not (lo <= t <= hi) or not math.isfinite(t):
            raise InputError(f"{t!r} is not a finite point of the closure of {curve.domain}")


_FINE = QuadOpts(1e-13, 1e-12, 50)


def cumulative_arclength(curve, t0, t, quad=_FINE):
    """``phi(t) = int_{t0}^{t} lambda``; endpoints may sit on the domain boundary."""
    _closed_check(curve, t0, t)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    vals, _ = integrate_batch(
        lambda x, _: _density_values(curve, x), np.full(ts.shape, float(t0)), ts, quad
    )
    return float(vals[0]) if np.ndim(t) == 0 else vals


class ArclengthParam:
    """Affine arclength ``phi(t) = int_{t0}^t lambda`` and its inverse ``h``.

    The table has 1024 nodes on ``[t0, t_end]``; ``h`` interpolates it with a
    monotone cubic and polishes with safeguarded Newton steps.
    """

    def __init__(self, curve, t0, t_end, n=1024, quad=_FINE):
        _closed_check(curve, t0, t_end)
        if not t_end > t0:
            raise InputError("need t_end > t0")
        self.curve = curve
        self.t0 = float(t0)
        self.quad = quad
        self.t = np.linspace(t0, t_end, n)
        pieces, _ = integrate_batch(lambda x, _: _density_values(curve, x), self.t[:-1], self.t[1:], quad)
        self.phi = np.concatenate([[0.0], np.cumsum(pieces)])
        self._inc = np.concatenate([[True], np.diff(self.phi) > 0])
        self._interp = PchipInterpolator(self.phi[self._inc], self.t[self._inc])

    @property
    def total(self):
        return float(self.phi[-1])

    def phi_at(self, t):
        """``phi(t)`` using the table plus one short quadrature."""
        t = float(t)
        if not self.t[0] <= t <= self.t[-1]:
            raise RangeError(f"{t!r} outside the tabulated range")
        i = min(int(np.searchsorted(self.t, t, side="right")) - 1, self.t.size - 2)
        v, _ = integrate_batch(lambda x, _: _density_values(self.curve, x), [self.t[i]], [t], self.quad)
        return float(self.phi[i] + v[0])

    def h(self, rho):
        """Inverse of ``phi``: the ``t`` with ``phi(t) = rho``."""
        rho = float(rho)
        if not 0.0 <= rho <= self.total * (1 + 1e-15):
            raise RangeError(f"rho={rho!r} outside [0, {self.total!r}]")
        if rho == 0.0:
            return self.t0
        i = int(np.searchsorted(self.phi, rho, side="left"))
        i = min(max(i, 1), self.t.size - 1)
        a, b = self.t[i - 1], self.t[i]
        x = float(np.clip(self._interp(rho), a, b))
        tol = 1e-9 * (1 + rho) * 1e-2
        for _ in range(60):
            g = self.phi_at(x) - rho
            if abs(g) <= tol:
                return x
            if g > 0:
                b = x
            else:
                a = x
            lam = float(_density_values(self.curve, np.array([x]))[0])
            step = x - g / lam if lam > 0 else None
            x = step if step is not None and a < step < b else 0.5 * (a + b)
            if b - a <= 4 * np.spacing(max(abs(a), abs(b))):
                return x
        return x
