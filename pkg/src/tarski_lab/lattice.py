"""Grid points, the componentwise order, and exact cube/segment geometry.

Points are plain tuples of ints.  ``GridShape`` carries the side length ``n``
and dimension ``k`` and does the range checking.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator, Optional, Sequence

Point = tuple[int, ...]
RationalPoint = tuple[Fraction, ...]

HALF = Fraction(1, 2)


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class GridShape:
    n: int
    k: int

    def __post_init__(self):
        if self.n < 2:
            raise ShapeError(f"side length n must be >= 2, got {self.n}")
        if self.k < 1:
            raise ShapeError(f"dimension k must be >= 1, got {self.k}")

    @property
    def max_weight(self) -> int:
        return self.k * (self.n - 1)

    @property
    def size(self) -> int:
        return self.n ** self.k

    @property
    def bottom(self) -> Point:
        return (0,) * self.k

    @property
    def top(self) -> Point:
        return (self.n - 1,) * self.k

    def contains(self, v: Sequence[int]) -> bool:
        return len(v) == self.k and all(0 <= x < self.n for x in v)

    def check(self, v: Sequence[int]) -> Point:
        """Return ``v`` as a tuple, raising ``ShapeError`` if it is off the grid."""
        v = tuple(int(x) for x in v)
        if len(v) != self.k:
            raise ShapeError(f"point {v} has {len(v)} coordinates, grid has k={self.k}")
        for x in v:
            if not 0 <= x < self.n:
                raise ShapeError(f"point {v} outside {{0..{self.n - 1}}}^{self.k}")
        return v

    def points(self) -> Iterator[Point]:
        return product(range(self.n), repeat=self.k)

    def invert(self, v: Sequence[int]) -> Point:
        """Reflect ``v`` through the grid centre: ``(n-1,...,n-1) - v``."""
        m = self.n - 1
        return tuple(m - x for x in v)


def leq(a: Sequence[int], b: Sequence[int]) -> bool:
    if len(a) != len(b):
        raise ShapeError(f"cannot compare points of dimension {len(a)} and {len(b)}")
    return all(x <= y for x, y in zip(a, b))


def hamming_weight(v: Sequence[int]) -> int:
    return sum(v)


def unit(k: int, j: int) -> Point:
    return tuple(1 if i == j else 0 for i in range(k))


def add(a: Sequence[int], b: Sequence[int]) -> Point:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence[int], b: Sequence[int]) -> Point:
    return tuple(x - y for x, y in zip(a, b))


@dataclass(frozen=True)
class CubeSegmentIntersection:
    """Parameter interval of ``u + t(v-u)`` inside a unit cube, and its top point."""

    t_lo: Fraction
    t_hi: Fraction
    z: RationalPoint


def point_at(u: Sequence[int], v: Sequence[int], t: Fraction) -> RationalPoint:
    return tuple(x + t * (y - x) for x, y in zip(u, v))


def in_cube(p: Sequence[Fraction], c: Sequence[int]) -> bool:
    """Closed unit cube centred at ``c``."""
    return all(abs(x - y) <= HALF for x, y in zip(p, c))


def segment_cube_intersection(
    u: Sequence[int], v: Sequence[int], c: Sequence[int]
) -> Optional[CubeSegmentIntersection]:
    """Intersect the segment from ``u`` to ``v`` with the closed cube around ``c``.

    Returns ``None`` if they miss.  Requires ``u <= v``, so the segment is
    nondecreasing in every coordinate and ``z`` (the point at ``t_hi``) is the
    componentwise maximum of the intersection.
    """
    if not leq(u, v):
        raise ValueError(f"segment endpoints must satisfy u <= v, got {tuple(u)}, {tuple(v)}")
    if len(c) != len(u):
        raise ShapeError("cube centre has the wrong dimension")
    lo, hi = Fraction(0), Fraction(1)
    for ui, vi, ci in zip(u, v, c):
        d = vi - ui
        if d == 0:
            if abs(ui - ci) > HALF:
                return None
            continue
        lo = max(lo, Fraction(2 * (ci - ui) - 1, 2 * d))
        hi = min(hi, Fraction(2 * (ci - ui) + 1, 2 * d))
        if lo > hi:
            return None
    return CubeSegmentIntersection(lo, hi, point_at(u, v, hi))
