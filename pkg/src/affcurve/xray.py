"""Iteration maps of the restricted X-ray transform and their Jacobians.

For base points ``(s_0, x_0)`` and ``(t_0, y_0)`` in ``R^{1+d}``::

    Phi^{2K}(t_1, s_1, ..., t_K, s_K)   = (s_K, x_0 - sum_{j<=K} (s_{j-1} - s_j) gamma(t_j))
    Phi^{2K+1}(t_1, s_1, ..., t_{K+1})  = (t_{K+1}, x_0 - sum_{j<=K} (s_{j-1} - s_j) gamma(t_j)
                                                   - s_K gamma(t_{K+1}))
    Psi^{2K}(s_1, t_1, ..., s_K, t_K)   = (t_K, y_0 + sum_{j<=K} s_j (gamma(t_{j-1}) - gamma(t_j)))
    Psi^{2K+1}(s_1, t_1, ..., s_{K+1})  = (s_{K+1}, y_0 + s_1 gamma(t_0)
                                                    - sum_{j<=K} (s_j - s_{j+1}) gamma(t_j))

Parameters are passed in the interleaved order shown.  The Jacobian is
taken at order ``k = d + 1`` where the map is between spaces of equal
dimension; ``d + 1 = 2D`` (even) or ``2D + 1`` (odd).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArityError, InputError, OrderError, ZeroTorsionError
from .geometry import torsion_table
from .sampling import sample_box

__all__ = [
    "XrayMapSpec",
    "xray_map",
    "xray_jacobian",
    "xray_jacobian_matrix",
    "xray_jacobian_fd",
    "xray_rhs",
    "xray_gi_ratio",
    "xray_gi_ratios",
    "InjectivityReport",
    "injectivity_probe",
]


@dataclass(frozen=True)
class XrayMapSpec:
    """Which map and which base point.

    ``base_scalar`` is ``s_0`` for ``Phi`` and ``t_0`` for ``Psi``;
    ``base_point`` is ``x_0`` or ``y_0``.  ``parity`` is optional and, when
    given, is checked against the curve dimension.
    """

    kind: str
    base_scalar: float
    base_point: tuple
    parity: str = None

    def __post_init__(self):
        if self.kind not in ("Phi", "Psi"):
            raise InputError("kind must be 'Phi' or 'Psi'")
        if self.parity not in (None, "even", "odd"):
            raise InputError("parity must be 'even' or 'odd'")
        object.__setattr__(self, "base_point", tuple(float(v) for v in self.base_point))
        object.__setattr__(self, "base_scalar", float(self.base_scalar))

    @staticmethod
    def parity_of(d):
        return "even" if (d + 1) % 2 == 0 else "odd"

    @staticmethod
    def D_of(d):
        return (d + 1) // 2

    def check(self, curve):
        d = curve.dim
        if len(self.base_point) != d:
            raise InputError(f"base point must have {d} coordinates")
        if self.parity is not None and self.parity != self.parity_of(d):
            raise InputError(f"parity {self.parity!r} inconsistent with d={d} (d+1 is {self.parity_of(d)})")

    @classmethod
    def from_dict(cls, data):
        return cls(data["kind"], data["base_scalar"], data["base_point"], data.get("parity"))

    def to_dict(self):
        return {"kind": self.kind, "base_scalar": self.base_scalar,
                "base_point": list(self.base_point), "parity": self.parity}


def _split(spec, P):
    """Split interleaved parameters into ``t`` (with ``t_0`` for Psi) and ``s`` (with ``s_0`` for Phi).

    Returns ``t, s`` where for Phi ``s[:, 0] = s_0`` and ``t[:, 0]`` is unused
    (``nan``), and for Psi ``t[:, 0] = t_0`` and ``s[:, 0]`` is unused.
    Arrays are indexed so that ``t[:, j]`` is ``t_j`` and ``s[:, j]`` is ``s_j``.
    """
    M, k = P.shape
    n_t = (k + 1) // 2 if spec.kind == "Phi" else k // 2
    n_s = k - n_t
    t = np.full((M, n_t + 1), np.nan)
    s = np.full((M, n_s + 1), np.nan)
    first, second = (t, s) if spec.kind == "Phi" else (s, t)
    first[:, 1:] = P[:, 0::2]
    second[:, 1:] = P[:, 1::2]
    if spec.kind == "Phi":
        s[:, 0] = spec.base_scalar
    else:
        t[:, 0] = spec.base_scalar
    return t, s


def _prep(spec, curve, params, order=None):
    spec.check(curve)
    P = np.asarray(params, dtype=float)
    single = P.ndim == 1
    P = np.atleast_2d(P)
    k = P.shape[1]
    if k < 1 or k > curve.dim + 1 or (order is not None and k != order):
        want = order if order is not None else f"1..{curve.dim + 1}"
        raise ArityError(f"{spec.kind} takes {want} parameters here, got {k}")
    t, s = _split(spec, P)
    ts = t[:, 1:] if spec.kind == "Phi" else t
    curve.check_domain(ts)
    return P, t, s, single


def xray_map(spec, curve, params):
    """Evaluate ``Phi^k`` or ``Psi^k`` with ``k = len(params)``; returns a point of ``R^{1+d}``."""
    P, t, s, single = _prep(spec, curve, params)
    M, k = P.shape
    d = curve.dim
    K = k // 2
    base = np.asarray(spec.base_point)
    g = curve.eval(np.nan_to_num(t, nan=_any_inside(curve)))  # (M, n_t + 1, d)
    out = np.empty((M, 1 + d))
    if spec.kind == "Phi":
        x = np.broadcast_to(base, (M, d)).copy()
        for j in range(1, K + 1):
            x -= (s[:, j - 1] - s[:, j])[:, None] * g[:, j]
        if k % 2 == 0:
            out[:, 0] = s[:, K]
        else:
            x -= s[:, K][:, None] * g[:, K + 1]
            out[:, 0] = t[:, K + 1]
    else:
        x = np.broadcast_to(base, (M, d)).copy()
        if k % 2 == 0:
            for j in range(1, K + 1):
                x += s[:, j][:, None] * (g[:, j - 1] - g[:, j])
            out[:, 0] = t[:, K]
        else:
            x += s[:, 1][:, None] * g[:, 0]
            for j in range(1, K + 1):
                x -= (s[:, j] - s[:, j + 1])[:, None] * g[:, j]
            out[:, 0] = s[:, K + 1]
    out[:, 1:] = x
    return out[0] if single else out


def _any_inside(curve):
    lo, hi = curve.domain
    if math.isfinite(lo) and math.isfinite(hi):
        return 0.5 * (lo + hi)
    if math.isfinite(lo):
        return lo + 1.0
    if math.isfinite(hi):
        return hi - 1.0
    return 0.0


def xray_jacobian_matrix(spec, curve, params):
    """The ``(d+1) x (d+1)`` derivative matrix, columns in parameter order."""
    d = curve.dim
    P, t, s, single = _prep(spec, curve, params, order=d + 1)
    M, k = P.shape
    K = k // 2
    tt = np.nan_to_num(t, nan=_any_inside(curve))
    jet = curve.jet(tt, 1)
    g, dg = jet[..., 0, :], jet[..., 1, :]
    cols = []  # each (M, 1 + d)

    def col(first, vec):
        c = np.empty((M, 1 + d))
        c[:, 0] = first
        c[:, 1:] = vec
        return c

    zero = np.zeros(M)
    if spec.kind == "Phi":
        odd = k % 2 == 1
        for j in range(1, K + 1):
            cols.append(col(zero, -(s[:, j - 1] - s[:, j])[:, None] * dg[:, j]))  # d/dt_j
            nxt = g[:, j + 1] if (j < K or odd) else None
            if nxt is not None:
                cols.append(col(zero, g[:, j] - nxt))  # d/ds_j
            else:
                cols.append(col(np.ones(M), g[:, j]))  # d/ds_K, even
        if odd:
            cols.append(col(np.ones(M), -s[:, K][:, None] * dg[:, K + 1]))  # d/dt_{K+1}
    else:
        if k % 2 == 0:
            for j in range(1, K + 1):
                cols.append(col(zero, g[:, j - 1] - g[:, j]))  # d/ds_j
                if j < K:
                    cols.append(col(zero, (s[:, j + 1] - s[:, j])[:, None] * dg[:, j]))
                else:
                    cols.append(col(np.ones(M), -s[:, K][:, None] * dg[:, K]))
        else:
            for j in range(1, K + 1):
                cols.append(col(zero, g[:, j - 1] - g[:, j]))  # d/ds_j
                cols.append(col(zero, -(s[:, j] - s[:, j + 1])[:, None] * dg[:, j]))  # d/dt_j
            cols.append(col(np.ones(M), g[:, K]))  # d/ds_{K+1}
    A = np.stack(cols, axis=-1)
    return A[0] if single else A


def xray_jacobian(spec, curve, params):
    """Determinant of :func:`xray_jacobian_matrix`."""
    A = xray_jacobian_matrix(spec, curve, params)
    out = np.linalg.det(A)
    return float(out) if np.ndim(out) == 0 else out


def xray_jacobian_fd(spec, curve, params, h=None):
    """Central-difference Jacobian determinant with one Richardson step (test oracle)."""
    p = np.asarray(params, dtype=float)
    k = p.size
    h = 1e-3 * (1 + np.abs(p)) if h is None else np.broadcast_to(h, p.shape)

    def cd(step):
        cols = []
        for i in range(k):
            e = np.zeros(k)
            e[i] = step[i]
            cols.append((xray_map(spec, curve, p + e) - xray_map(spec, curve, p - e)) / (2 * step[i]))
        return np.stack(cols, axis=-1)

    A = (4 * cd(h / 2) - cd(h)) / 3
    return float(np.linalg.det(A))


def xray_rhs(spec, curve, params):
    """Right-hand side of the Jacobian lower bound matching ``spec`` and ``d``."""
    d = curve.dim
    P, t, s, single = _prep(spec, curve, params, order=d + 1)
    D = XrayMapSpec.D_of(d)
    even = (d + 1) % 2 == 0
    tt = np.nan_to_num(t, nan=_any_inside(curve))
    L = np.abs(torsion_table(curve, tt, check=False)[..., -1])
    p1, p2 = 1.0 / (d + 1), 2.0 / (d + 1)
    M = P.shape[0]
    out = np.ones(M)

    def block(i, s_gap, js):
        v = s_gap * L[:, i] ** p2
        for j in js:
            if j != i:
                v = v * (t[:, j] - t[:, i]) ** 2
        return v

    if spec.kind == "Psi" and even:
        for i in range(1, D):
            out *= block(i, np.abs(s[:, i + 1] - s[:, i]), range(0, D + 1))
        out *= (L[:, 0] * L[:, D]) ** p1 * np.abs(t[:, D] - t[:, 0])
    elif spec.kind == "Phi" and even:
        for i in range(1, D + 1):
            out *= block(i, np.abs(s[:, i] - s[:, i - 1]), range(1, D + 1))
    elif spec.kind == "Psi":
        for i in range(1, D + 1):
            out *= block(i, np.abs(s[:, i + 1] - s[:, i]), range(0, D + 1))
        out *= L[:, 0] ** p1
    else:
        for i in range(1, D + 1):
            out *= block(i, np.abs(s[:, i] - s[:, i - 1]), range(1, D + 2))
        out *= L[:, D + 1] ** p1
    return float(out[0]) if single else out


def _check_distinct(spec, curve, params):
    P, t, s, _ = _prep(spec, curve, params, order=curve.dim + 1)
    tv = t if spec.kind == "Psi" else t[:, 1:]
    sv = s if spec.kind == "Phi" else s[:, 1:]
    for name, v in (("t", tv), ("s", sv)):
        v = np.sort(v, axis=1)
        if np.any(np.diff(v, axis=1) == 0):
            raise OrderError(f"{name}-parameters must be distinct")
    L = torsion_table(curve, tv, check=False)[..., -1]
    if np.any(L == 0):
        raise ZeroTorsionError(curve.dim, None, "torsion vanishes at a t-parameter; ratio undefined")


def xray_gi_ratios(spec, curve, params, check=True):
    """Vectorised :func:`xray_gi_ratio` over rows of ``params``."""
    P = np.atleast_2d(np.asarray(params, dtype=float))
    if check:
        _check_distinct(spec, curve, P)
    J = np.abs(xray_jacobian(spec, curve, P))
    R = xray_rhs(spec, curve, P)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.atleast_1d(J / R)


def xray_gi_ratio(spec, curve, params):
    """``|det D map| / RHS`` at one parameter vector; ties are rejected."""
    return float(xray_gi_ratios(spec, curve, params)[0])


# ---------------------------------------------------------------------------
# near-injectivity


@dataclass
class InjectivityReport:
    max_multiplicity: int
    confirmed_collisions: int
    unconfirmed: int
    candidates: int
    n: int
    bound: int
    witness: list = None

    def to_dict(self):
        return dict(self.__dict__)


def _t_index(spec, k):
    """Positions of t-parameters within the interleaved vector."""
    start = 0 if spec.kind == "Phi" else 1
    return np.arange(start, k, 2)


def _newton(spec, curve, x0, q, lo, hi, iters=50):
    """Batched Newton for ``map(x) = q`` starting at rows of ``x0``.

    Returns solutions and a mask of converged rows that stay inside the box
    and the curve domain.
    """
    x = x0.copy()
    ok = np.ones(x.shape[0], dtype=bool)
    tix = _t_index(spec, x.shape[1])
    scale = 1.0 + np.max(np.abs(q), axis=1)
    conv = np.zeros_like(ok)
    for _ in range(iters):
        live = ok & ~conv
        if not np.any(live):
            break
        xl = x[live]
        inside = np.all(curve.contains(xl[:, tix]), axis=1)
        idx = np.flatnonzero(live)
        ok[idx[~inside]] = False
        idx, xl = idx[inside], xl[inside]
        if idx.size == 0:
            break
        F = xray_map(spec, curve, xl) - q[idx]
        res = np.max(np.abs(F), axis=1)
        done = res <= 1e-12 * scale[idx]
        conv[idx[done]] = True
        idx, xl, F = idx[~done], xl[~done], F[~done]
        if idx.size == 0:
            break
        A = xray_jacobian_matrix(spec, curve, xl)
        try:
            step = np.linalg.solve(A, F[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.full_like(xl, np.nan)
        bad = ~np.all(np.isfinite(step), axis=1)
        ok[idx[bad]] = False
        x[idx[~bad]] = xl[~bad] - step[~bad]
    inbox = np.all((x >= lo) & (x <= hi), axis=1)
    return x, ok & conv & inbox, ok & conv


def injectivity_probe(spec, curve, box, n=10000, tol=1e-2, seed=0, ordered=False):
    """Largest confirmed number of distinct preimages of one image point.

    Samples ``n`` parameter vectors in ``box`` (pairs ``(lo, hi)`` per
    parameter), bins their images into cells of size ``tol``, and for each
    cell with several samples runs Newton from every other sample towards the
    image of the first one.  Converged solutions inside the box that differ
    from each other are distinct preimages.

    Parameters
    ----------
    ordered : bool
        Restrict samples and solutions to the chamber where both the t- and
        the s-parameters increase.

    Returns
    -------
    InjectivityReport
        ``unconfirmed`` counts Newton runs that diverged or left the domain.
    """
    d = curve.dim
    spec.check(curve)
    box = np.asarray(box, dtype=float)
    if box.shape != (d + 1, 2):
        raise ArityError(f"box needs {d + 1} (lo, hi) pairs")
    lo, hi = box[:, 0], box[:, 1]
    P = np.concatenate(sample_box(lo, hi, n, "random", seed))
    tix = _t_index(spec, d + 1)
    six = np.setdiff1d(np.arange(d + 1), tix)

    def chamber(X):
        return np.all(np.diff(X[:, tix], axis=1) > 0, axis=1) & np.all(np.diff(X[:, six], axis=1) > 0, axis=1)

    P = P[np.all(curve.contains(P[:, tix]), axis=1)]
    if ordered:
        P = P[chamber(P)]
    n_eff = P.shape[0]
    bound = math.factorial(XrayMapSpec.D_of(d) + 1)
    if n_eff < 2:
        return InjectivityReport(1 if n_eff else 0, 0, 0, 0, n_eff, bound)
    img = xray_map(spec, curve, P)
    cells = np.floor(img / tol).astype(np.int64)
    _, inv, counts = np.unique(cells, axis=0, return_inverse=True, return_counts=True)
    inv = inv.ravel()
    multi = np.flatnonzero(counts >= 2)
    if multi.size == 0:
        return InjectivityReport(1, 0, 0, 0, n_eff, bound)
    order = np.argsort(inv, kind="stable")
    starts = np.concatenate([[0], np.cumsum(counts)])
    heads, others = [], []
    for c in multi:
        members = order[starts[c] : starts[c + 1]]
        heads.extend([members[0]] * (members.size - 1))
        others.extend(members[1:])
    heads, others = np.array(heads), np.array(others)
    q = img[heads]
    sol, good, converged = _newton(spec, curve, P[others], q, lo, hi)
    if ordered:
        good &= chamber(sol)
    unconfirmed = int(np.sum(~converged))
    best, witness, collisions = 1, None, 0
    sep = 1e-6 * (1 + np.max(np.abs(box)))
    for h in np.unique(heads):
        rows = np.flatnonzero((heads == h) & good)
        pre = [P[h]]
        for r in rows:
            if all(np.max(np.abs(sol[r] - p)) > sep for p in pre):
                pre.append(sol[r])
        if len(pre) > 1:
            collisions += 1
        if len(pre) > best:
            best, witness = len(pre), [p.tolist() for p in pre]
    return InjectivityReport(best, collisions, unconfirmed, int(others.size), n_eff, bound, witness)
