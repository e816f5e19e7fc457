"""Deterministic, partitioned sampling of boxes.

Samples are produced in fixed-size partitions.  Partition ``p`` of a
seeded-random stream draws from ``SeedSequence(seed, spawn_key=(p,))``, so
the first ``n`` samples are the same for every ``N >= n`` (prefix property)
and partitions can be generated and reduced in any order.
"""

import itertools
import math
import warnings

import numpy as np
from scipy.stats import qmc

from .errors import InputError

__all__ = ["PARTITION", "SAMPLERS", "partitions", "sample_box", "ordered_grid_tuples"]

PARTITION = 4096
SAMPLERS = ("grid", "random", "sobol")


def partitions(n, size=PARTITION):
    """``(index, start, stop)`` of every partition covering ``range(n)``."""
    return [(p, s, min(s + size, n)) for p, s in enumerate(range(0, n, size))]


def _rng(seed, p):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(p,)))


def sample_box(lo, hi, n, sampler="random", seed=0):
    """``n`` points in the box ``prod [lo_i, hi_i]``; list of partition arrays.

    ``sampler`` is ``random`` (seeded uniform), ``sobol`` (scrambled Sobol,
    seeded) or ``grid`` (cell midpoints of a product grid, thinned evenly to
    ``n`` points).
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape or np.any(hi <= lo) or not np.all(np.isfinite(lo + hi)):
        raise InputError("sampling box must be finite with lo < hi")
    n = int(n)
    if n < 1:
        raise InputError("need at least one sample")
    k = lo.size
    if sampler == "random":
        return [lo + (hi - lo) * _rng(seed, p).random((b - a, k)) for p, a, b in partitions(n)]
    if sampler == "sobol":
        eng = qmc.Sobol(k, scramble=True, seed=np.random.default_rng(int(seed)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # non power-of-two draws are intended
            u = eng.random(n)
        return [lo + (hi - lo) * u[a:b] for _, a, b in partitions(n)]
    if sampler == "grid":
        m = max(1, math.ceil(n ** (1.0 / k) - 1e-9))
        axes = [(np.arange(m) + 0.5) / m for _ in range(k)]
        g = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
        idx = np.unique(np.round(np.linspace(0, g.shape[0] - 1, n)).astype(int))
        pts = lo + (hi - lo) * g[idx]
        return [pts[a:b] for _, a, b in partitions(pts.shape[0])]
    raise InputError(f"unknown sampler {sampler!r}; choose one of {SAMPLERS}")


def ordered_grid_tuples(lo, hi, d, n):
    """At least ``n`` strictly increasing ``d``-tuples from a uniform grid of ``[lo, hi]``."""
    m = d
    while math.comb(m, d) < n:
        m += 1
    x = lo + (hi - lo) * (np.arange(m) + 0.5) / m
    combos = np.array(list(itertools.combinations(range(m), d)), dtype=int)
    idx = np.unique(np.round(np.linspace(0, combos.shape[0] - 1, n)).astype(int))
    return x[combos[idx]]
