"""Independent reference implementations used by the tests.

These are deliberately naive: definitional scans, exhaustive enumeration and
direct rational arithmetic, sharing no code with the package beyond ``leq``.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from tarski_lab.lattice import leq

HALF = Fraction(1, 2)

# spine used throughout the hand-worked examples
S = [(0, 0), (0, 1), (1, 1), (2, 1), (2, 2)]


def tube_exists_witness(v, L, n):
    """``v`` is within ``L`` of some diagonal point ``(i, ..., i)``."""
    return any(all(abs(x - i) <= L for x in v) for i in range(n))


def cube_meets_segment(u, v, c, steps=None):
    """Rational interval by solving each coordinate constraint separately,
    intersected by hand, then confirmed by evaluating the midpoint."""
    lo, hi = Fraction(0), Fraction(1)
    for ui, vi, ci in zip(u, v, c):
        d = vi - ui
        if d == 0:
            if abs(Fraction(ui - ci)) > HALF:
                return None
            continue
        # |ui + t d - ci| <= 1/2 with d > 0
        a = (Fraction(ci - ui) - HALF) / d
        b = (Fraction(ci - ui) + HALF) / d
        lo, hi = max(lo, a), min(hi, b)
    if lo > hi:
        return None
    mid = (lo + hi) / 2
    assert all(abs(x + mid * (y - x) - z) <= HALF for x, y, z in zip(u, v, c))
    return lo, hi


def lexmin_touching_path(u, v):
    """Lexicographically smallest monotone unit-step path from u to v whose
    every cube meets the segment, by exhaustive search."""
    u, v = tuple(u), tuple(v)
    best = None

    def rec(path):
        nonlocal best
        cur = path[-1]
        if cur == v:
            if best is None or path < best:
                best = list(path)
            return
        for j in range(len(u)):
            w = tuple(x + (i == j) for i, x in enumerate(cur))
            if leq(w, v) and cube_meets_segment(u, v, w) is not None:
                path.append(w)
                rec(path)
                path.pop()

    rec([u])
    return best


def mu_scan(spine, v):
    return max(i for i, s in enumerate(spine) if leq(s, v))


def big_m_scan(spine, v):
    return min(i for i, s in enumerate(spine) if leq(v, s))


def herringbone_by_definition(spine, j, v):
    v = tuple(v)
    if v in spine:
        i = spine.index(v)
        if i == j:
            return v
        return spine[i + 1] if i < j else spine[i - 1]
    mu, M = mu_scan(spine, v), big_m_scan(spine, v)
    up = [b - a for a, b in zip(spine[mu], spine[mu + 1])]
    down = [b - a for a, b in zip(spine[M - 1], spine[M])]
    return tuple(x + p - q for x, p, q in zip(v, up, down))


def slice_counts_numpy(n, k, L):
    """Histogram of tube-point weights over the full grid."""
    grids = np.meshgrid(*([np.arange(n)] * k), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    ok = pts.max(axis=1) - pts.min(axis=1) <= 2 * L
    return np.bincount(pts[ok].sum(axis=1), minlength=k * (n - 1) + 1)


def all_points(n, k):
    return itertools.product(range(n), repeat=k)
