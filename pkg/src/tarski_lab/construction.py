"""Hard-instance machinery: the diagonal tube, weight slices, regions,
rasterized segments between connecting points, and the sampler for the
uniform distribution over the resulting herringbone family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence, Union

from .herringbone import HerringboneInstance, Spine
from .lattice import GridShape, Point, hamming_weight, leq
from .rng import SeededRng


class ParamError(ValueError):
    """Invalid tube parameters; ``problems`` lists every violated constraint."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


# --------------------------------------------------------------------- tube


def in_tube(v: Sequence[int], L: int) -> bool:
    """Membership in the tube of half-width ``L`` around the main diagonal.

    Equivalent to the existence of a diagonal level ``i`` with every
    ``|v_c - i| <= L``; for integer data that is exactly ``max - min <= 2L``.
    """
    return max(v) - min(v) <= 2 * L


def in_tube_bruteforce(v: Sequence[int], L: int, n: int) -> bool:
    return any(all(abs(x - i) <= L for x in v) for i in range(n))


# --------------------------------------------------------------- parameters


@dataclass(frozen=True)
class TubeParams:
    shape: GridShape
    L: int
    rho: int
    strict: bool = True

    def __post_init__(self):
        problems = param_problems(self.shape, self.L, self.rho, self.strict)
        if problems:
            raise ParamError(problems)

    @property
    def n(self) -> int:
        return self.shape.n

    @property
    def k(self) -> int:
        return self.shape.k

    @property
    def index_set(self) -> range:
        """Slice weights that carry a connecting point: multiples of rho."""
        return range(0, self.shape.max_weight + 1, self.rho)

    @property
    def region_bases(self) -> range:
        return range(0, self.shape.max_weight, self.rho)

    @property
    def num_regions(self) -> int:
        return self.shape.max_weight // self.rho


def param_problems(shape: GridShape, L: int, rho: int, strict: bool) -> list[str]:
    k, K = shape.k, shape.max_weight
    problems = []
    if L < 0:
        problems.append(f"L must be >= 0 (got {L})")
    if rho < 1:
        problems.append(f"rho must be >= 1 (got {rho})")
        return problems
    if K % rho:
        problems.append(f"rho must divide k(n-1) = {K} (got rho={rho})")
    if rho % k:
        problems.append(f"k = {k} must divide rho (got rho={rho})")
    if L < 0:
        return problems
    if strict:
        if rho < 12 * k * L:
            problems.append(f"strict mode needs rho >= 12kL = {12 * k * L} (got rho={rho})")
    else:
        if rho < 2 * k * L + 1:
            problems.append(f"relaxed mode needs rho >= 2kL+1 = {2 * k * L + 1} (got rho={rho})")
        # connecting points on consecutive slices must be comparable
        spread = (2 * L * (k - 1)) // k
        if rho // k < 2 * spread:
            problems.append(
                f"relaxed mode needs rho/k >= 2*floor(2L(k-1)/k) = {2 * spread} so consecutive "
                f"slices are ordered (got rho/k={rho // k})"
            )
    return problems


def validate_params(shape: GridShape, L: int, rho: int, strict: bool = True) -> TubeParams:
    return TubeParams(shape, L, rho, strict)


def _sqrt_root(n: int):
    r = math.isqrt(n - 1)
    if r * r == n - 1 and r % 12 == 0 and r > 0:
        return r
    return None


def sqrt_scaled_params(n: int, k: int) -> TubeParams:
    """``L = sqrt(n-1)/12`` and ``rho = k sqrt(n-1)``; needs ``n-1`` a square of a multiple of 12."""
    r = _sqrt_root(n)
    if r is None:
        raise ParamError(
            [f"n-1 = {n - 1} is not the square of a multiple of 12; nearest valid n is {nearest_sqrt_scaled_n(n)}"]
        )
    return TubeParams(GridShape(n, k), r // 12, k * r, strict=True)


def nearest_sqrt_scaled_n(n: int) -> int:
    """Nearest side length ``n'`` with ``n'-1 = (12m)^2`` for some ``m >= 1`` (ties go down)."""
    m = max(1, round(math.sqrt(max(n - 1, 0)) / 12))
    best = None
    for cand in (m - 1, m, m + 1):
        if cand < 1:
            continue
        nn = (12 * cand) ** 2 + 1
        key = (abs(nn - n), nn)
        if best is None or key < best[0]:
            best = (key, nn)
    return best[1]


def default_params(n: int, k: int) -> TubeParams:
    """Parameters used when none are given.

    Square-root scaled values when ``n`` allows them, else the smallest valid ``rho`` for
    ``L = 1`` (strict, then relaxed), else ``L = 0``.
    """
    if _sqrt_root(n) is not None:
        return sqrt_scaled_params(n, k)
    shape = GridShape(n, k)
    K = shape.max_weight
    for L in (1, 0):
        for strict in (True, False):
            for rho in range(k, K + 1, k):
                if not param_problems(shape, L, rho, strict):
                    return TubeParams(shape, L, rho, strict)
    raise ParamError([f"no valid tube parameters for n={n}, k={k}"])


# ------------------------------------------------------------------- slices


@lru_cache(maxsize=None)
def box_count(m: int, s: int, lo: int, hi: int) -> int:
    """Number of ``y`` in ``[lo, hi]^m`` with coordinate sum ``s``."""
    if m == 0:
        return 1 if s == 0 else 0
    if hi < lo:
        return 0
    s -= m * lo
    w = hi - lo + 1
    if s < 0 or s > m * (w - 1):
        return 0
    total = 0
    for i in range(min(m, s // w) + 1):
        total += (-1) ** i * math.comb(m, i) * math.comb(s - i * w + m - 1, m - 1)
    return total


def _windows(shape: GridShape, L: int, a: int) -> range:
    """Window starts whose class can hold a point of weight ``a``.

    Points of window ``c`` lie in ``[c, c+2L]^k``, so ``kc <= a <= k(c+2L)``.
    """
    last = max(0, shape.n - 1 - 2 * L)
    lo = max(0, -((2 * L * shape.k - a) // shape.k))
    return range(lo, min(last, a // shape.k) + 1)


def _window_bounds(shape: GridShape, L: int, c: int) -> tuple[int, int, bool]:
    """``(lo, hi, need_top)`` of the canonical window class for start ``c``.

    A tube point belongs to window ``c = max(0, max_coord - 2L)``; for ``c > 0``
    that means its largest coordinate equals ``c + 2L``.
    """
    return c, min(c + 2 * L, shape.n - 1), c > 0


def _class_count(m: int, s: int, lo: int, hi: int, need_top: bool) -> int:
    total = box_count(m, s, lo, hi)
    if need_top:
        total -= box_count(m, s, lo, hi - 1)
    return total


def tube_slice_count(a: int, shape: GridShape, L: int) -> int:
    """Exact number of points of weight ``a`` with ``max - min <= 2L``."""
    return sum(_class_count(shape.k, a, *_window_bounds(shape, L, c)) for c in _windows(shape, L, a))


def low_slice_count(a: int, params: TubeParams) -> int:
    """Exact number of tube points of weight ``a``."""
    if not 0 <= a <= params.shape.max_weight:
        raise ValueError(f"weight {a} outside [0, {params.shape.max_weight}]")
    return tube_slice_count(a, params.shape, params.L)


def low_slice_points(a: int, shape: GridShape, L: int) -> list[Point]:
    """All tube points of weight ``a`` in lexicographic order."""
    out: list[Point] = []
    k, n = shape.k, shape.n

    def rec(prefix: list[int], rest: int):
        i = len(prefix)
        if i == k:
            if rest == 0 and max(prefix) - min(prefix) <= 2 * L:
                out.append(tuple(prefix))
            return
        left = k - i - 1
        for x in range(max(0, rest - left * (n - 1)), min(n - 1, rest) + 1):
            if prefix and (max(max(prefix), x) - min(min(prefix), x) > 2 * L):
                continue
            prefix.append(x)
            rec(prefix, rest - x)
            prefix.pop()

    rec([], a)
    return out


def _sample_slice(shape: GridShape, L: int, a: int, rng: SeededRng) -> Point:
    k = shape.k
    classes = []
    total = 0
    for c in _windows(shape, L, a):
        bounds = _window_bounds(shape, L, c)
        cnt = _class_count(k, a, *bounds)
        if cnt:
            classes.append((cnt, bounds))
            total += cnt
    if total == 0:
        raise ValueError(f"slice of weight {a} is empty")
    r = rng.randbelow(total)
    for cnt, bounds in classes:
        if r < cnt:
            break
        r -= cnt
    lo, hi, need_top = bounds
    out = []
    rest = a
    for i in range(k):
        left = k - i - 1
        r = rng.randbelow(_class_count(left + 1, rest, lo, hi, need_top))
        for y in range(lo, hi + 1):
            w = _class_count(left, rest - y, lo, hi, need_top and y != hi)
            if r < w:
                break
            r -= w
        out.append(y)
        rest -= y
        need_top = need_top and y != hi
    return tuple(out)


def sample_low_uniform(a: int, params: TubeParams, rng: SeededRng) -> Point:
    """Exactly uniform draw from the tube points of weight ``a``."""
    if not 0 <= a <= params.shape.max_weight:
        raise ValueError(f"weight {a} outside [0, {params.shape.max_weight}]")
    return _sample_slice(params.shape, params.L, a, rng)


# -------------------------------------------------------------- rasterizer


def rasterize_segment(u: Sequence[int], v: Sequence[int]) -> list[Point]:
    """Monotone unit-step path from ``u`` to ``v`` whose cubes all meet the segment.

    From the current vertex take ``z``, the highest point of the segment inside
    its cube, and step to the lexicographically smallest neighbour
    ``cur + e_c`` whose cube contains ``z`` (that is, the largest such ``c``).
    All arithmetic is on integers: ``z = u + (num/den)(v - u)``.
    """
    u = tuple(u)
    v = tuple(v)
    if not leq(u, v):
        raise ValueError(f"rasterize_segment needs u <= v, got {u}, {v}")
    k = len(u)
    d = [b - a for a, b in zip(u, v)]
    live = [c for c in range(k) if d[c] > 0]
    cur = list(u)
    path = [u]
    while True:
        if tuple(cur) == v:
            return path
        # t_hi = min(1, min_c (2(cur_c - u_c) + 1) / (2 d_c))
        num, den = 1, 1
        for c in live:
            cn, cd = 2 * (cur[c] - u[c]) + 1, 2 * d[c]
            if cn * den < num * cd:
                num, den = cn, cd
        for c in reversed(live):
            if cur[c] >= v[c]:
                continue
            cur[c] += 1
            if all(abs(2 * (u[i] - cur[i]) * den + 2 * num * d[i]) <= den for i in range(k)):
                break
            cur[c] -= 1
        else:
            raise AssertionError(f"no neighbour of {tuple(cur)} contains the segment's exit point")
        path.append(tuple(cur))


# ------------------------------------------------------- connecting points


@dataclass(frozen=True)
class ConnectingPoints:
    points: Mapping[int, Point]

    def validate(self, params: TubeParams) -> None:
        problems = []
        expected = set(params.index_set)
        if set(self.points) != expected:
            problems.append(f"connecting points must be given exactly for weights {sorted(expected)}")
        for a, p in sorted(self.points.items()):
            if not params.shape.contains(p):
                problems.append(f"chi_{a} = {p} is not a grid point")
            elif hamming_weight(p) != a:
                problems.append(f"chi_{a} = {p} has weight {hamming_weight(p)}")
            elif not in_tube(p, params.L):
                problems.append(f"chi_{a} = {p} is outside the tube T_{params.L}")
        if problems:
            raise ParamError(problems)
        keys = sorted(self.points)
        for a, b in zip(keys, keys[1:]):
            if not leq(self.points[a], self.points[b]):
                raise ParamError([f"chi_{a} = {self.points[a]} is not below chi_{b} = {self.points[b]}"])


def build_spine(cp: ConnectingPoints, params: TubeParams) -> Spine:
    """Join the rasterized segments between consecutive connecting points."""
    cp.validate(params)
    keys = sorted(cp.points)
    verts: list[Point] = [cp.points[keys[0]]]
    for a, b in zip(keys, keys[1:]):
        verts.extend(rasterize_segment(cp.points[a], cp.points[b])[1:])
    return Spine(params.shape, verts)


def sample_connecting_points(params: TubeParams, rng: SeededRng) -> ConnectingPoints:
    return ConnectingPoints({a: sample_low_uniform(a, params, rng) for a in params.index_set})


def sample_instance_u(params: TubeParams, rng: SeededRng) -> HerringboneInstance:
    """One draw from the uniform distribution over the herringbone family.

    Connecting points are independent uniform slice points (they biject with
    spines), and ``j`` is drawn independently and uniformly.
    """
    cp = sample_connecting_points(params, rng)
    spine = build_spine(cp, params)
    j = rng.randint(0, params.shape.max_weight)
    return HerringboneInstance(params.shape, spine, j)


# ------------------------------------------------------------------ regions


def region_index(x: Union[int, Sequence[int]], params: TubeParams) -> int:
    """Base weight of the region containing a point (or weight).

    Boundary weights belong to the region above them, except the top weight,
    which belongs to the last region.
    """
    wt = x if isinstance(x, int) else hamming_weight(x)
    K = params.shape.max_weight
    if not 0 <= wt <= K:
        raise ValueError(f"weight {wt} outside [0, {K}]")
    if wt == K:
        return K - params.rho
    return params.rho * (wt // params.rho)


def region_distance(alpha: int, beta: int, params: TubeParams) -> Fraction:
    return Fraction(abs(alpha - beta), params.rho)


def in_region(v: Sequence[int], base: int, params: TubeParams) -> bool:
    """Closed-region membership (boundary slices belong to both neighbours)."""
    wt = hamming_weight(v)
    return in_tube(v, params.L) and base <= wt <= base + params.rho
