"""Query-counted fixed-point solvers.

A solver receives any object with a ``shape`` attribute and a ``query(v)``
method.  Each solver memoizes its own queries so the oracle is never asked the
same vertex twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .herringbone import MAX_SCAN
from .lattice import GridShape, Point, leq


class SolverFailure(RuntimeError):
    """The solver hit a diagnostic condition (cap exceeded, impossible response)."""


class BudgetError(ValueError):
    pass


class _Memo:
    def __init__(self, oracle):
        self.oracle = oracle
        self.shape: GridShape = oracle.shape
        self.seen: dict[Point, Point] = {}

    def __call__(self, v: Sequence[int]) -> Point:
        v = tuple(v)
        r = self.seen.get(v)
        if r is None:
            r = tuple(self.oracle.query(v))
            self.seen[v] = r
        return r

    @property
    def queries(self) -> int:
        return len(self.seen)


@dataclass
class SolveReport:
    solver: str
    answer: Optional[Point]
    queries: int
    iterations: int
    success: bool
    trace: object = None
    message: str = ""
    inner_iterations: list = field(default_factory=list)


def solve_bruteforce(oracle) -> SolveReport:
    shape = oracle.shape
    if shape.size > MAX_SCAN:
        raise BudgetError(f"brute force needs n^k = {shape.size} <= {MAX_SCAN}")
    f = _Memo(oracle)
    for it, v in enumerate(shape.points(), 1):
        if f(v) == v:
            return SolveReport("brute", v, f.queries, it, True, getattr(oracle, "transcript", None))
    return SolveReport("brute", None, f.queries, shape.size, False, getattr(oracle, "transcript", None),
                       "no fixed point found")


def solve_kleene(oracle) -> SolveReport:
    """Iterate ``f`` upward from the bottom element until it stops moving."""
    f = _Memo(oracle)
    v = oracle.shape.bottom
    it = 0
    while True:
        it += 1
        fv = f(v)
        if fv == v:
            return SolveReport("kleene", v, f.queries, it, True, getattr(oracle, "transcript", None))
        if not leq(v, fv):
            raise SolverFailure(f"iterate does not ascend: f{v} = {fv}; the oracle is not monotone")
        v = fv


def balanced_point(shape: GridShape, x: int) -> Point:
    """Integer point of weight ``x`` with coordinates as equal as possible."""
    q, r = divmod(x, shape.k)
    return tuple(q + 1 if i < r else q for i in range(shape.k))


def iteration_cap(shape: GridShape) -> int:
    return 8 * shape.k * (math.ceil(math.log2(shape.n)) + 2)


@dataclass
class SpineSearch:
    vertex: Point
    image: Point
    iterations: int
    states: list = field(default_factory=list)


def _search_spine_vertex(f: Callable[[Point], Point], shape: GridShape, x: int,
                         truth: Optional[Point] = None, record: bool = False) -> SpineSearch:
    if not 0 <= x <= shape.max_weight:
        raise ValueError(f"weight {x} outside [0, {shape.max_weight}]")
    k = shape.k
    a = [0] * k
    c = [shape.n - 1] * k
    b = list(balanced_point(shape, x))
    cap = iteration_cap(shape)
    states = []
    for m in range(1, cap + 1):
        if not (leq(a, b) and leq(b, c)):
            raise SolverFailure(f"state order a <= b <= c broken at iteration {m}: {a}, {b}, {c}")
        if truth is not None and not (leq(a, truth) and leq(truth, c)):
            raise SolverFailure(f"target {truth} escaped [a, c] at iteration {m}")
        if sum(b) != x:
            raise SolverFailure(f"probe weight drifted to {sum(b)} at iteration {m}")
        bt = tuple(b)
        fb = f(bt)
        diff = [y - z for y, z in zip(fb, bt)]
        if sum(abs(t) for t in diff) <= 1:
            if record:
                states.append((tuple(a), bt, tuple(c), None))
            return SpineSearch(bt, fb, m, states)
        if sorted(diff) != [-1] + [0] * (k - 2) + [1]:
            raise SolverFailure(f"f{bt} = {fb} is neither a spine step nor a +1/-1 move")
        p = diff.index(1)
        q = diff.index(-1)
        d = min(c[p] - b[p], b[q] - a[q])
        if record:
            states.append((tuple(a), bt, tuple(c), d))
        if d < 1:
            raise SolverFailure(f"step size d = {d} < 1 at iteration {m} (p={p}, q={q})")
        a[p] = b[p]
        c[q] = b[q]
        step = (d + 1) // 2
        b[p] += step
        b[q] -= step
    raise SolverFailure(f"spine search for weight {x} exceeded {cap} iterations")


def find_spine_vertex_by_weight(oracle, x: int, record: bool = False) -> SpineSearch:
    """Locate the spine vertex of weight ``x``.

    Keeps a box ``[a, c]`` around the target and a probe ``b`` of weight
    ``x``.  An off-spine answer ``b + e_p - e_q`` shows the target lies at or
    above ``b`` in coordinate ``p`` and at or below it in ``q``; the probe then
    moves half the available slack along ``p`` and back along ``q``.
    """
    f = oracle if isinstance(oracle, _Memo) else _Memo(oracle)
    truth = None
    inst = getattr(f.oracle, "instance", None)
    if inst is not None:
        truth = inst.spine[x]
    return _search_spine_vertex(f, f.shape, x, truth, record)


def solve_herringbone(oracle) -> SolveReport:
    """Binary search for the fixed point along the spine.

    The image of ``s^x`` (already queried by the inner search) tells which side
    of ``x`` the fixed-point index lies on.
    """
    f = _Memo(oracle)
    shape = oracle.shape
    lo, hi = 0, shape.max_weight
    outer = 0
    inner = []
    while lo <= hi:
        outer += 1
        x = (lo + hi) // 2
        found = find_spine_vertex_by_weight(f, x)
        inner.append(found.iterations)
        s, fs = found.vertex, found.image
        if fs == s:
            return SolveReport("herringbone", s, f.queries, outer, True,
                               getattr(oracle, "transcript", None), inner_iterations=inner)
        if leq(s, fs):
            lo = x + 1
        else:
            hi = x - 1
    return SolveReport("herringbone", None, f.queries, outer, False, getattr(oracle, "transcript", None),
                       "binary search exhausted without a fixed point", inner)


def herringbone_query_bound(shape: GridShape) -> int:
    outer = math.ceil(math.log2(shape.max_weight + 1)) + 1
    return outer * (shape.k * math.ceil(math.log2(shape.n)) + 3 * shape.k + 1)


def spine_search_iteration_bound(shape: GridShape) -> int:
    return shape.k * math.ceil(math.log2(shape.n)) + 3 * shape.k


SOLVERS = {
    "brute": solve_bruteforce,
    "kleene": solve_kleene,
    "herringbone": solve_herringbone,
}
