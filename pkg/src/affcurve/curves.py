"""Curves in R^d with closed-form derivatives up to order d.

Every curve kind evaluates its derivatives exactly (closed-form rules,
Leibniz and Faa di Bruno formulas); there is deliberately no numerical
differentiation, since torsion is a determinant of derivatives and amplifies
differencing noise badly for flat curves such as ``exp(-1/t)``.

The central method is :meth:`Curve.jet`, which returns all derivatives
``0..n`` at a vector of parameters in one array of shape ``(N, n + 1, d)``.
"""

import math
from functools import lru_cache

import numpy as np

from .errors import DomainError, InputError, UnsupportedOrderError

__all__ = [
    "Curve",
    "MonomialCurve",
    "PolynomialCurve",
    "MonomialLikeCurve",
    "BuiltinCurve",
    "ReparamCurve",
    "AffineImageCurve",
    "ReparamMap",
    "Perturbation",
    "moment_curve",
    "reparametrize",
    "affine_image",
    "curve_from_dict",
]

# Below this parameter exp(-1/t) underflows to zero in double precision.
FLAT_FLUSH = 1e-3


def falling(a, m):
    """Falling factorial ``a (a-1) ... (a-m+1)``; works elementwise."""
    out = np.ones_like(np.asarray(a, dtype=float))
    for j in range(m):
        out = out * (np.asarray(a, dtype=float) - j)
    return out


def _as_domain(domain):
    if domain is None or len(domain) != 2:
        raise InputError("domain must be a pair [lo, hi]")
    lo, hi = (float(v) if v is not None else None for v in domain)
    lo = -math.inf if lo is None else lo
    hi = math.inf if hi is None else hi
    if not lo < hi:
        raise InputError(f"empty domain ({lo}, {hi})")
    return lo, hi


def _json_float(x):
    if math.isinf(x):
        return None
    return float(x)


class Curve:
    """A curve ``gamma: (lo, hi) -> R^d`` with exact derivatives.

    Subclasses implement :meth:`_jet`.  Instances are immutable.
    """

    kind = None

    def __init__(self, dim, domain):
        if int(dim) != dim or dim < 2:
            raise InputError(f"curve dimension must be an integer >= 2, got {dim}")
        self._dim = int(dim)
        self._domain = _as_domain(domain)

    @property
    def dim(self):
        return self._dim

    @property
    def domain(self):
        return self._domain

    def __setattr__(self, name, value):
        if getattr(self, "_frozen", False):
            raise AttributeError(f"{type(self).__name__} is immutable")
        super().__setattr__(name, value)

    def _freeze(self):
        self._frozen = True

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()!r})"

    # -- evaluation ---------------------------------------------------------

    def contains(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self._domain
        return (t > lo) & (t < hi)

    def check_domain(self, t):
        t = np.asarray(t, dtype=float)
        ok = self.contains(t)
        if not np.all(ok):
            bad = t[~ok] if t.ndim else t
            raise DomainError(
                f"parameter {float(np.ravel(bad)[0])!r} outside open domain {self._domain}"
            )

    def jet(self, t, n=None, check=True):
        """All derivatives of orders ``0..n`` at the parameters ``t``.

        Parameters
        ----------
        t : array_like
            Parameters (any shape); flattened internally.
        n : int, optional
            Highest order, defaults to the dimension.
        check : bool
            Validate that every parameter is interior to the domain.

        Returns
        -------
        ndarray of shape ``t.shape + (n + 1, d)``
        """
        n = self._dim if n is None else int(n)
        if n < 0 or n > self._dim:
            raise UnsupportedOrderError(f"order {n} not in 0..{self._dim}")
        t = np.asarray(t, dtype=float)
        if check:
            self.check_domain(t)
        flat = t.reshape(-1)
        out = self._jet(flat, n)
        return out.reshape(t.shape + (n + 1, self._dim))

    def eval(self, t, order=0):
        """The ``order``-th derivative of the curve at ``t``.

        A scalar ``t`` gives a vector of length ``d``; an array gives shape
        ``t.shape + (d,)``.
        """
        if order < 0 or order > self._dim:
            raise UnsupportedOrderError(f"order {order} not in 0..{self._dim}")
        return self.jet(t, order)[..., order, :]

    def __call__(self, t):
        return self.eval(t, 0)

    def _jet(self, t, n):
        raise NotImplementedError

    # -- derived constructors ------------------------------------------------

    def restrict(self, lo, hi):
        """Same curve on the sub-interval ``(lo, hi)`` of its domain."""
        lo, hi = _as_domain((lo, hi))
        if lo < self._domain[0] or hi > self._domain[1]:
            raise DomainError(f"({lo}, {hi}) is not inside the domain {self._domain}")
        data = self.to_dict()
        data["domain"] = [_json_float(lo), _json_float(hi)]
        return curve_from_dict(data)

    def to_dict(self):
        raise NotImplementedError


# ---------------------------------------------------------------------------
# monomials and polynomials


class MonomialCurve(Curve):
    """``gamma(t) = (c_1 t^{a_1}, ..., c_d t^{a_d})`` with ``a`` increasing."""

    kind = "monomial"

    def __init__(self, exponents, coeffs=None, domain=(0.0, 1.0)):
        a = np.asarray(exponents, dtype=float)
        c = np.ones_like(a) if coeffs is None else np.asarray(coeffs, dtype=float)
        if a.ndim != 1 or c.shape != a.shape:
            raise InputError("exponents and coefficients must be vectors of equal length")
        if np.any(np.diff(a) <= 0):
            raise InputError("exponents must be strictly increasing")
        if np.any(a == 0):
            raise InputError("exponents must be nonzero")
        if np.any(c == 0):
            raise InputError("coefficients must be nonzero")
        super().__init__(a.size, domain)
        lo, hi = self.domain
        integral = np.all(a == np.round(a))
        if not integral and lo < 0:
            raise InputError("non-integer exponents need a domain inside (0, inf)")
        if np.any(a < 0) and lo < 0 < hi:
            raise InputError("negative exponents need a domain avoiding 0")
        self.exponents = a
        self.coeffs = c
        self._freeze()

    def _jet(self, t, n):
        out = np.empty((t.size, n + 1, self.dim))
        for m in range(n + 1):
            f = self.coeffs * falling(self.exponents, m)
            with np.errstate(divide="ignore", invalid="ignore"):
                p = np.power(t[:, None], self.exponents - m)
                out[:, m, :] = np.where(f == 0, 0.0, f * p)
        return out

    @property
    def exponent_sum(self):
        return float(np.sum(self.exponents))

    def torsion_constant(self):
        """``prod |a_i c_i| * prod_{i<j} (a_j - a_i)``, i.e. ``|L(t)| t^{d(d+1)/2 - A}``."""
        return _torsion_constant(self.exponents, self.coeffs)

    def affine_weight(self):
        """The constant ``w(a)`` in front of the affine arclength."""
        d = self.dim
        return self.torsion_constant() ** (2.0 / (d * (d + 1)))

    def to_dict(self):
        return {
            "kind": self.kind,
            "exponents": self.exponents.tolist(),
            "coeffs": self.coeffs.tolist(),
            "domain": [_json_float(v) for v in self.domain],
        }


def _torsion_constant(a, theta0):
    a = np.asarray(a, dtype=float)
    d = a.size
    out = float(np.prod(np.abs(a * theta0)))
    for i in range(d):
        for j in range(i + 1, d):
            out *= a[j] - a[i]
    return out


def moment_curve(d, domain=(-math.inf, math.inf)):
    """The moment curve ``(t, t^2, ..., t^d)`` as a polynomial curve."""
    rows = []
    for i in range(1, d + 1):
        row = [0.0] * (i + 1)
        row[i] = 1.0
        rows.append(row)
    return PolynomialCurve(rows, domain)


class PolynomialCurve(Curve):
    """Polynomial components; row ``i`` holds ascending coefficients of ``gamma_i``."""

    kind = "polynomial"

    def __init__(self, coeff_matrix, domain=(-math.inf, math.inf)):
        rows = [np.atleast_1d(np.asarray(r, dtype=float)) for r in coeff_matrix]
        if len(rows) < 2 or any(r.ndim != 1 or r.size == 0 for r in rows):
            raise InputError("coeff_matrix must have at least two non-empty rows")
        width = max(r.size for r in rows)
        mat = np.zeros((len(rows), width))
        for i, r in enumerate(rows):
            mat[i, : r.size] = r
        super().__init__(len(rows), domain)
        self.coeff_matrix = mat
        derivs = [mat]
        for _ in range(self.dim):
            prev = derivs[-1]
            nxt = prev[:, 1:] * np.arange(1, prev.shape[1])[None, :]
            if nxt.shape[1] == 0:
                nxt = np.zeros((self.dim, 1))
            derivs.append(nxt)
        self._derivs = derivs
        self._freeze()

    def _jet(self, t, n):
        out = np.empty((t.size, n + 1, self.dim))
        for m in range(n + 1):
            c = self._derivs[m]
            # Horner, vectorised across components
            acc = np.zeros((t.size, self.dim))
            for k in range(c.shape[1] - 1, -1, -1):
                acc = acc * t[:, None] + c[:, k]
            out[:, m, :] = acc
        return out

    def component_polys(self):
        """Components as :class:`numpy.polynomial.Polynomial` objects."""
        return [np.polynomial.Polynomial(row) for row in self.coeff_matrix]

    def to_dict(self):
        rows = []
        for row in self.coeff_matrix:
            nz = np.flatnonzero(row)
            rows.append(row[: (nz[-1] + 1 if nz.size else 1)].tolist())
        return {
            "kind": self.kind,
            "coeff_matrix": rows,
            "domain": [_json_float(v) for v in self.domain],
        }


# ---------------------------------------------------------------------------
# flat functions and monomial-like perturbations


@lru_cache(maxsize=None)
def _flat_polys(n):
    """Coefficients of ``P_m`` with ``(d/dt)^m exp(-1/t) = P_m(1/t) exp(-1/t)``."""
    polys = [np.array([1.0])]
    for _ in range(n):
        p = polys[-1]
        dp = p[1:] * np.arange(1, p.size)
        diff = p.copy()
        diff[: dp.size] -= dp
        polys.append(np.concatenate([[0.0, 0.0], diff]))
    return tuple(polys)


def flat_exp_jet(t, n):
    """Derivatives ``0..n`` of ``exp(-1/t)`` for ``t > 0``; shape ``(N, n + 1)``.

    Values are flushed to exactly zero for ``t < 1e-3`` where the true value
    underflows.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros((t.size, n + 1))
    live = t >= FLAT_FLUSH
    if not np.any(live):
        return out
    u = 1.0 / t[live]
    e = np.exp(-u)
    for m, p in enumerate(_flat_polys(n)):
        out[live, m] = np.polynomial.polynomial.polyval(u, p) * e
    return out


class Perturbation:
    """A factor ``theta(t)`` for a monomial-like component.

    Families
    --------
    ``constant``  : ``theta = c``
    ``power``     : ``theta = 1 + c t^p`` with ``p > 0``
    ``expflat``   : ``theta = 1 + c exp(-1/t)``
    """

    FAMILIES = ("constant", "power", "expflat")

    def __init__(self, family, c=1.0, p=None):
        if family not in self.FAMILIES:
            raise InputError(f"unknown perturbation family {family!r}")
        self.family = family
        self.c = float(c)
        self.p = None if p is None else float(p)
        if family == "constant" and self.c == 0:
            raise InputError("constant perturbation must be nonzero")
        if family == "power" and not (self.p is not None and self.p > 0):
            raise InputError("power perturbation needs p > 0")

    @property
    def value_at_zero(self):
        return self.c if self.family == "constant" else 1.0

    def jet(self, t, n):
        t = np.asarray(t, dtype=float)
        out = np.zeros((t.size, n + 1))
        if self.family == "constant":
            out[:, 0] = self.c
        elif self.family == "power":
            out[:, 0] = 1.0
            for m in range(n + 1):
                f = falling(self.p, m)
                if f != 0:
                    out[:, m] += self.c * f * np.power(t, self.p - m)
        else:
            out[:] = self.c * flat_exp_jet(t, n)
            out[:, 0] += 1.0
        return out

    def to_dict(self):
        data = {"family": self.family, "c": self.c}
        if self.p is not None:
            data["p"] = self.p
        return data

    @classmethod
    def from_dict(cls, data):
        return cls(data.get("family"), data.get("c", 1.0), data.get("p"))


class MonomialLikeCurve(Curve):
    """``gamma(t) = (t^{a_1} theta_1(t), ..., t^{a_d} theta_d(t))`` on ``(0, T)``."""

    kind = "monomial_like"

    def __init__(self, exponents, perturbations=None, domain=(0.0, 1.0)):
        a = np.asarray(exponents, dtype=float)
        if a.ndim != 1:
            raise InputError("exponents must be a vector")
        if np.any(np.diff(a) <= 0) or np.any(a == 0):
            raise InputError("exponents must be nonzero and strictly increasing")
        if perturbations is None:
            perturbations = [Perturbation("constant", 1.0)] * a.size
        perts = [p if isinstance(p, Perturbation) else Perturbation.from_dict(p) for p in perturbations]
        if len(perts) != a.size:
            raise InputError("need one perturbation per component")
        super().__init__(a.size, domain)
        if self.domain[0] != 0.0 or not math.isfinite(self.domain[1]):
            raise InputError("monomial-like curves live on (0, T) with finite T")
        self.exponents = a
        self.perturbations = tuple(perts)
        self._freeze()

    def _jet(self, t, n):
        out = np.zeros((t.size, n + 1, self.dim))
        for i, (a, pert) in enumerate(zip(self.exponents, self.perturbations)):
            th = pert.jet(t, n)
            for m in range(n + 1):
                acc = np.zeros(t.size)
                for k in range(m + 1):
                    f = falling(a, m - k)
                    if f == 0:
                        continue
                    acc += math.comb(m, k) * f * np.power(t, a - m + k) * th[:, k]
                out[:, m, i] = acc
        return out

    @property
    def theta0(self):
        return np.array([p.value_at_zero for p in self.perturbations])

    @property
    def exponent_sum(self):
        return float(np.sum(self.exponents))

    def torsion_constant(self):
        return _torsion_constant(self.exponents, self.theta0)

    def affine_weight(self):
        d = self.dim
        return self.torsion_constant() ** (2.0 / (d * (d + 1)))

    def to_dict(self):
        return {
            "kind": self.kind,
            "exponents": self.exponents.tolist(),
            "perturbations": [p.to_dict() for p in self.perturbations],
            "domain": [_json_float(v) for v in self.domain],
        }


# ---------------------------------------------------------------------------
# built-in examples


def _trig_jet(t, n, phase=0.0):
    """Derivatives of ``sin(t + phase)``: shape ``(N, n + 1)``."""
    return np.stack([np.sin(t + phase + m * math.pi / 2) for m in range(n + 1)], axis=1)


def _leibniz(f, g, n):
    out = np.zeros_like(f)
    for m in range(n + 1):
        for k in range(m + 1):
            out[:, m] += math.comb(m, k) * f[:, k] * g[:, m - k]
    return out


def _sjolin_jet(t, n, k):
    """Derivatives of ``sin(t^-k) exp(-t^-2)`` up to order ``n <= 2``."""
    out = np.zeros((t.size, n + 1))
    live = t > 0.03  # exp(-t^-2) underflows below this
    tt = t[live]
    u = tt ** (-k)
    du = -k * tt ** (-k - 1)
    ddu = k * (k + 1) * tt ** (-k - 2)
    w = -(tt ** -2.0)
    dw = 2.0 * tt ** -3.0
    ddw = -6.0 * tt ** -4.0
    v = np.exp(w)
    s = [np.sin(u), np.cos(u) * du, -np.sin(u) * du**2 + np.cos(u) * ddu]
    e = [v, v * dw, v * (ddw + dw**2)]
    f = np.stack(s[: n + 1], axis=1)
    g = np.stack(e[: n + 1], axis=1)
    out[live] = _leibniz(f, g, n)
    return out


class BuiltinCurve(Curve):
    """Named example curves.

    ``sjolin``        (t, sin(t^-k) exp(-t^-2)),           0 < t <= 1
    ``slow_spiral``   ((1+e^-t) cos t, (1+e^-t) sin t),    t > 0
    ``helix``         (t, sin t, cos t),                    t in R
    ``flat_exp``      (t, exp(-1/t)),                       t > 0
    ``flat_exp_pair`` (exp(-1/t), t exp(-1/t)),             t > 0
    """

    kind = "builtin"
    NATURAL = {
        "sjolin": (2, (0.0, 1.0)),
        "slow_spiral": (2, (0.0, math.inf)),
        "helix": (3, (-math.inf, math.inf)),
        "flat_exp": (2, (0.0, math.inf)),
        "flat_exp_pair": (2, (0.0, math.inf)),
    }

    def __init__(self, name, params=None, domain=None):
        if name not in self.NATURAL:
            raise InputError(f"unknown builtin curve {name!r}")
        params = dict(params or {})
        dim, natural = self.NATURAL[name]
        if name == "sjolin":
            k = params.get("k", 3)
            if int(k) != k or k < 1:
                raise InputError("sjolin parameter k must be a positive integer")
            params["k"] = int(k)
            # the closed interval (0, 1] is stored open at a hair beyond 1
            natural = (0.0, math.inf)
        domain = natural if domain is None else domain
        super().__init__(dim, domain)
        if self.domain[0] < natural[0] or self.domain[1] > natural[1]:
            raise InputError(f"domain {self.domain} exceeds the natural domain {natural}")
        self.name = name
        self.params = params
        self._freeze()

    def _jet(self, t, n):
        N = t.size
        if self.name == "helix":
            out = np.zeros((N, n + 1, 3))
            out[:, 0, 0] = t
            if n >= 1:
                out[:, 1, 0] = 1.0
            out[:, :, 1] = _trig_jet(t, n)
            out[:, :, 2] = _trig_jet(t, n, math.pi / 2)
            return out
        if self.name == "slow_spiral":
            f = np.zeros((N, n + 1))
            f[:, 0] = 1.0
            e = np.exp(-t)
            for m in range(n + 1):
                f[:, m] += (-1) ** m * e
            out = np.empty((N, n + 1, 2))
            out[:, :, 0] = _leibniz(f, _trig_jet(t, n, math.pi / 2), n)
            out[:, :, 1] = _leibniz(f, _trig_jet(t, n), n)
            return out
        if self.name == "flat_exp":
            out = np.zeros((N, n + 1, 2))
            out[:, 0, 0] = t
            if n >= 1:
                out[:, 1, 0] = 1.0
            out[:, :, 1] = flat_exp_jet(t, n)
            return out
        if self.name == "flat_exp_pair":
            e = flat_exp_jet(t, n)
            out = np.empty((N, n + 1, 2))
            out[:, :, 0] = e
            tf = t[:, None] * e
            tf[:, 1:] += np.arange(1, n + 1)[None, :] * e[:, :-1]
            out[:, :, 1] = tf
            return out
        # sjolin
        out = np.zeros((N, n + 1, 2))
        out[:, 0, 0] = t
        if n >= 1:
            out[:, 1, 0] = 1.0
        out[:, :, 1] = _sjolin_jet(t, n, self.params["k"])
        return out

    def to_dict(self):
        return {
            "kind": self.kind,
            "name": self.name,
            "params": dict(self.params),
            "domain": [_json_float(v) for v in self.domain],
        }


# ---------------------------------------------------------------------------
# reparametrization and affine images


def bell_polynomials(x, n):
    """Partial Bell polynomials ``B[m][k]`` evaluated at ``x[1..n]``.

    ``x`` has shape ``(N, n + 1)`` with ``x[:, j]`` the j-th derivative of
    the inner map (``x[:, 0]`` is ignored).
    """
    N = x.shape[0]
    B = [[np.zeros(N) for _ in range(n + 1)] for _ in range(n + 1)]
    B[0][0] = np.ones(N)
    for m in range(1, n + 1):
        for k in range(1, m + 1):
            acc = np.zeros(N)
            for i in range(1, m - k + 2):
                acc += math.comb(m - 1, i - 1) * x[:, i] * B[m - i][k - 1]
            B[m][k] = acc
    return B


class ReparamMap:
    """A reparametrizing map ``phi``: ``power(k)``, ``exponential`` or ``affine(a, b)``.

    ``exponential`` is ``phi(t) = exp(-t)``.
    """

    def __init__(self, kind, k=None, a=None, b=0.0):
        if kind == "power":
            if k is None or k == 0:
                raise InputError("power map needs k != 0")
            self.k = float(k)
        elif kind == "affine":
            if a is None or a == 0:
                raise InputError("affine map needs a != 0")
            self.a, self.b = float(a), float(b)
        elif kind != "exponential":
            raise InputError(f"unknown reparametrization {kind!r}")
        self.kind = kind

    @classmethod
    def from_json(cls, spec):
        if spec == "exponential":
            return cls("exponential")
        if isinstance(spec, dict) and len(spec) == 1:
            if "power" in spec:
                return cls("power", k=spec["power"])
            if "affine" in spec:
                a, b = spec["affine"]
                return cls("affine", a=a, b=b)
        raise InputError(f"bad reparametrization spec {spec!r}")

    def to_json(self):
        if self.kind == "exponential":
            return "exponential"
        if self.kind == "power":
            return {"power": self.k}
        return {"affine": [self.a, self.b]}

    def jet(self, t, n):
        out = np.zeros((t.size, n + 1))
        if self.kind == "power":
            for m in range(n + 1):
                f = falling(self.k, m)
                if f != 0:
                    out[:, m] = f * np.power(t, self.k - m)
        elif self.kind == "exponential":
            e = np.exp(-t)
            for m in range(n + 1):
                out[:, m] = (-1) ** m * e
        else:
            out[:, 0] = self.a * t + self.b
            if n >= 1:
                out[:, 1] = self.a
        return out

    def preimage(self, domain):
        """``phi^{-1}(domain)`` as an increasing interval."""
        lo, hi = domain
        if self.kind == "power":
            if lo < 0:
                raise DomainError("power reparametrization needs a domain inside (0, inf)")
            ends = [_safe_pow(lo, 1.0 / self.k), _safe_pow(hi, 1.0 / self.k)]
        elif self.kind == "exponential":
            if lo < 0:
                raise DomainError("exponential reparametrization needs a domain inside (0, inf)")
            ends = [-_safe_log(hi), -_safe_log(lo)]
        else:
            ends = [(lo - self.b) / self.a, (hi - self.b) / self.a]
        return min(ends) + 0.0, max(ends) + 0.0


def _safe_pow(x, e):
    if x == 0:
        return 0.0 if e > 0 else math.inf
    if math.isinf(x):
        return math.inf if e > 0 else 0.0
    return x**e


def _safe_log(x):
    if x == 0:
        return -math.inf
    return math.log(x)


class ReparamCurve(Curve):
    """``gamma o phi`` with derivatives from Faa di Bruno's formula."""

    kind = "reparam"

    def __init__(self, inner, rmap, domain=None):
        if not isinstance(rmap, ReparamMap):
            rmap = ReparamMap.from_json(rmap)
        natural = rmap.preimage(inner.domain)
        if domain is None:
            domain = natural
        super().__init__(inner.dim, domain)
        if self.domain[0] < natural[0] or self.domain[1] > natural[1]:
            raise DomainError(f"reparametrized domain {self.domain} escapes {natural}")
        self.inner = inner
        self.map = rmap
        self._freeze()

    def _jet(self, t, n):
        x = self.map.jet(t, n)
        inner = self.inner._jet(x[:, 0], n)
        out = np.empty_like(inner)
        out[:, 0, :] = inner[:, 0, :]
        if n == 0:
            return out
        B = bell_polynomials(x, n)
        for m in range(1, n + 1):
            acc = np.zeros((t.size, self.dim))
            for k in range(1, m + 1):
                acc += inner[:, k, :] * B[m][k][:, None]
            out[:, m, :] = acc
        return out

    def to_dict(self):
        data = {"kind": self.kind, "map": self.map.to_json(), "inner": self.inner.to_dict()}
        if self.domain != self.map.preimage(self.inner.domain):
            data["domain"] = [_json_float(v) for v in self.domain]
        return data


class AffineImageCurve(Curve):
    """``A gamma(t) + b`` for invertible ``A``."""

    kind = "affine_image"

    def __init__(self, inner, matrix, shift=None):
        A = np.asarray(matrix, dtype=float)
        d = inner.dim
        if A.shape != (d, d):
            raise InputError(f"matrix must be {d}x{d}")
        b = np.zeros(d) if shift is None else np.asarray(shift, dtype=float)
        if b.shape != (d,):
            raise InputError(f"shift must have length {d}")
        scale = max(1.0, float(np.max(np.abs(A)))) ** d
        if abs(np.linalg.det(A)) <= 1e-14 * scale:
            raise InputError("affine image needs an invertible matrix")
        super().__init__(d, inner.domain)
        self.inner = inner
        self.matrix = A
        self.shift = b
        self._freeze()

    def _jet(self, t, n):
        inner = self.inner._jet(t, n)
        out = inner @ self.matrix.T
        out[:, 0, :] += self.shift
        return out

    def restrict(self, lo, hi):
        return AffineImageCurve(self.inner.restrict(lo, hi), self.matrix, self.shift)

    def to_dict(self):
        return {
            "kind": self.kind,
            "matrix": self.matrix.tolist(),
            "shift": self.shift.tolist(),
            "inner": self.inner.to_dict(),
        }


def reparametrize(curve, rmap, domain=None):
    """Return ``curve o phi`` on ``phi^{-1}(I)`` (or the given sub-domain)."""
    return ReparamCurve(curve, rmap, domain)


def affine_image(curve, A, b=None):
    """Return the curve ``A gamma + b``."""
    return AffineImageCurve(curve, A, b)


def curve_from_dict(data):
    """Build a curve from its JSON description."""
    if not isinstance(data, dict) or "kind" not in data:
        raise InputError("curve description must be an object with a 'kind'")
    kind = data["kind"]
    if kind == "monomial":
        return MonomialCurve(data["exponents"], data.get("coeffs"), data.get("domain", (0.0, 1.0)))
    if kind == "polynomial":
        return PolynomialCurve(data["coeff_matrix"], data.get("domain", (None, None)))
    if kind == "monomial_like":
        return MonomialLikeCurve(data["exponents"], data.get("perturbations"), data.get("domain", (0.0, 1.0)))
    if kind == "builtin":
        return BuiltinCurve(data["name"], data.get("params"), data.get("domain"))
    if kind == "reparam":
        return ReparamCurve(curve_from_dict(data["inner"]), ReparamMap.from_json(data["map"]), data.get("domain"))
    if kind == "affine_image":
        return AffineImageCurve(curve_from_dict(data["inner"]), data["matrix"], data.get("shift"))
    raise InputError(f"unknown curve kind {kind!r}")
