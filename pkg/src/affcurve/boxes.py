"""Finite unions of axis-aligned boxes with exact measure.

An :class:`IndicatorSet` stores half-open boxes ``prod [lo_i, hi_i)``.  The
canonical form is a pairwise disjoint decomposition obtained by sweeping
along axis 0: the breakpoints split space into slabs, each slab's
cross-section is canonicalised recursively, and adjacent slabs with the same
cross-section are merged.
"""

import numpy as np

from .errors import InputError

__all__ = ["IndicatorSet", "box_union", "canonicalize", "overlap_volume"]


def _canon(boxes):
    """Disjoint decomposition of ``boxes`` (shape ``(B, n, 2)``)."""
    if boxes.shape[0] == 0:
        return boxes
    n = boxes.shape[1]
    lo, hi = boxes[:, 0, 0], boxes[:, 0, 1]
    if n == 1:
        order = np.argsort(lo, kind="stable")
        out = []
        cur_lo, cur_hi = lo[order[0]], hi[order[0]]
        for i in order[1:]:
            if lo[i] <= cur_hi:
                cur_hi = max(cur_hi, hi[i])
            else:
                out.append((cur_lo, cur_hi))
                cur_lo, cur_hi = lo[i], hi[i]
        out.append((cur_lo, cur_hi))
        return np.array(out, dtype=float).reshape(-1, 1, 2)
    xs = np.unique(np.concatenate([lo, hi]))
    pieces = []
    prev_cross, prev_start, prev_end = None, None, None
    for a, b in zip(xs[:-1], xs[1:]):
        active = (lo <= a) & (hi >= b)
        cross = _canon(boxes[active, 1:]) if np.any(active) else None
        same = (
            prev_cross is not None and cross is not None and prev_end == a
            and prev_cross.shape == cross.shape and np.array_equal(prev_cross, cross)
        )
        if same:
            prev_end = b
            continue
        if prev_cross is not None:
            pieces.append(_stack(prev_start, prev_end, prev_cross))
        prev_cross, prev_start, prev_end = cross, a, b
    if prev_cross is not None:
        pieces.append(_stack(prev_start, prev_end, prev_cross))
    if not pieces:
        return np.zeros((0, n, 2))
    return np.concatenate(pieces)


def _stack(a, b, cross):
    m = cross.shape[0]
    first = np.broadcast_to(np.array([a, b], dtype=float), (m, 1, 2))
    return np.concatenate([first, cross], axis=1)


def canonicalize(boxes):
    """Pairwise disjoint boxes covering the same set (shape ``(B', n, 2)``)."""
    return _canon(np.asarray(boxes, dtype=float))


class IndicatorSet:
    """A finite union of half-open axis-aligned boxes in ``R^n``.

    Parameters
    ----------
    dim : int
    boxes : array_like, shape ``(B, dim, 2)``
        Per-axis ``[lo, hi)`` pairs; every box must have positive volume.
    canonical : bool
        Set when the boxes are already known to be disjoint.
    """

    def __init__(self, dim, boxes=(), canonical=False):
        dim = int(dim)
        if dim < 1:
            raise InputError("dimension must be >= 1")
        b = np.asarray(boxes, dtype=float)
        if b.size == 0:
            b = np.zeros((0, dim, 2))
        if b.ndim != 3 or b.shape[1:] != (dim, 2):
            raise InputError(f"boxes must have shape (B, {dim}, 2)")
        if not np.all(np.isfinite(b)):
            raise InputError("box corners must be finite")
        if np.any(b[:, :, 1] <= b[:, :, 0]):
            raise InputError("every box needs lo < hi on each axis")
        self.dim = dim
        self.boxes = b
        self.canonical = bool(canonical) or b.shape[0] <= 1

    @classmethod
    def box(cls, lo, hi):
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        return cls(lo.size, np.stack([lo, hi], axis=-1)[None], canonical=True)

    @classmethod
    def empty(cls, dim):
        return cls(dim)

    def canonicalize(self):
        if self.canonical:
            return self
        return IndicatorSet(self.dim, _canon(self.boxes), canonical=True)

    @property
    def is_empty(self):
        return self.boxes.shape[0] == 0

    def __len__(self):
        return self.boxes.shape[0]

    @property
    def measure(self):
        c = self.canonicalize()
        return float(np.sum(np.prod(c.boxes[:, :, 1] - c.boxes[:, :, 0], axis=1)))

    def bounding_box(self):
        if self.is_empty:
            return None
        return self.boxes[:, :, 0].min(axis=0), self.boxes[:, :, 1].max(axis=0)

    def translate(self, v):
        v = np.asarray(v, dtype=float)
        return IndicatorSet(self.dim, self.boxes + v[None, :, None], self.canonical)

    def reflect(self):
        """The set ``-S``."""
        return IndicatorSet(self.dim, -self.boxes[:, :, ::-1], self.canonical)

    def scale(self, factors):
        f = np.broadcast_to(np.asarray(factors, dtype=float), (self.dim,))
        if np.any(f <= 0):
            raise InputError("scale factors must be positive")
        return IndicatorSet(self.dim, self.boxes * f[None, :, None], self.canonical)

    def union(self, other):
        if other.dim != self.dim:
            raise InputError("dimension mismatch")
        return IndicatorSet(self.dim, np.concatenate([self.boxes, other.boxes])).canonicalize()

    def contains(self, x):
        """Membership of points ``x`` (shape ``(N, n)``)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.is_empty:
            return np.zeros(x.shape[0], dtype=bool)
        inside = np.ones((x.shape[0], len(self)), dtype=bool)
        for i in range(self.dim):
            xi = x[:, i : i + 1]
            inside &= (xi >= self.boxes[None, :, i, 0]) & (xi < self.boxes[None, :, i, 1])
        return np.any(inside, axis=1)

    def intersection_volume(self, other, shifts):
        """``vol((self + v) ∩ other)`` for every row ``v`` of ``shifts``."""
        return overlap_volume(self.canonicalize().boxes, other.canonicalize().boxes, shifts)

    def to_dict(self):
        return {"dim": self.dim, "boxes": self.boxes.tolist()}

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict) or "dim" not in data or "boxes" not in data:
            raise InputError("indicator set needs 'dim' and 'boxes'")
        return cls(data["dim"], data["boxes"]).canonicalize()

    def __repr__(self):
        return f"IndicatorSet(dim={self.dim}, boxes={len(self)}, canonical={self.canonical})"


def box_union(boxes, dim=None):
    """Canonical :class:`IndicatorSet` of the union of ``boxes``."""
    b = np.asarray(boxes, dtype=float)
    if dim is None:
        if b.size == 0:
            raise InputError("dimension of an empty union must be given")
        dim = b.shape[1]
    return IndicatorSet(dim, b).canonicalize()


def overlap_volume(A, B, shifts, chunk=2_000_000, block=256):
    """``sum_{a, b} vol((a + v) ∩ b)`` over box arrays ``A``, ``B`` per shift ``v``.

    Shifts are processed in consecutive blocks; for each block, pairs that
    cannot overlap for any shift in it are pruned first.
    """
    v = np.atleast_2d(np.asarray(shifts, dtype=float))
    N = v.shape[0]
    out = np.zeros(N)
    if A.shape[0] == 0 or B.shape[0] == 0 or N == 0:
        return out
    ia, ib = np.meshgrid(np.arange(A.shape[0]), np.arange(B.shape[0]), indexing="ij")
    ia, ib = ia.ravel(), ib.ravel()
    # pair (a, b) overlaps only if b_lo - a_hi < v_i < b_hi - a_lo on every axis
    dlo = B[ib, :, 0] - A[ia, :, 1]
    dhi = B[ib, :, 1] - A[ia, :, 0]
    for s0 in range(0, N, block):
        vb = v[s0 : s0 + block]
        keep = np.all((dlo < vb.max(axis=0)) & (dhi > vb.min(axis=0)), axis=1)
        if not np.any(keep):
            continue
        out[s0 : s0 + block] = _overlap_pairs(A[ia[keep]], B[ib[keep]], vb, chunk)
    return out


def _overlap_pairs(Ap, Bp, v, chunk):
    P = Ap.shape[0]
    out = np.zeros(v.shape[0])
    step = max(1, chunk // P)
    for s in range(0, v.shape[0], step):
        vs = v[s : s + step]
        vol = np.ones((vs.shape[0], P))
        for i in range(Ap.shape[1]):
            lo = np.maximum(Ap[None, :, i, 0] + vs[:, i : i + 1], Bp[None, :, i, 0])
            hi = np.minimum(Ap[None, :, i, 1] + vs[:, i : i + 1], Bp[None, :, i, 1])
            vol *= np.clip(hi - lo, 0.0, None)
        out[s : s + step] = vol.sum(axis=1)
    return out
