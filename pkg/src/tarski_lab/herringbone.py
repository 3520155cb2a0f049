"""Spines and the multi-dimensional herringbone function.

A spine is a maximal chain ``s^0 < s^1 < ... < s^{k(n-1)}`` of the grid in
which consecutive vertices differ by one unit step.  Given a spine and an index
``j``, the herringbone function sends spine vertices one step along the spine
towards ``s^j`` and moves every off-spine vertex ``v`` by ``+1`` in the
direction the spine leaves ``s^{mu(v)}`` and ``-1`` in the direction it enters
``s^{M(v)}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

from .lattice import GridShape, Point, hamming_weight, leq
from .rng import SeededRng

MAX_SPINE_STEPS = 10**8
MAX_SCAN = 10**6


class SpineError(ValueError):
    """A vertex sequence violates one of the spine invariants.

    ``invariant`` names the violated rule, e.g. ``"wt(s^i) = i"``.
    """

    def __init__(self, invariant: str, detail: str):
        super().__init__(f"spine invariant {invariant!r} violated: {detail}")
        self.invariant = invariant
        self.detail = detail


class ScanBudgetError(RuntimeError):
    pass


def spine_violations(shape: GridShape, vertices: Sequence[Sequence[int]]) -> list[SpineError]:
    """All spine-invariant violations of ``vertices`` (empty list if it is a spine)."""
    out: list[SpineError] = []
    K = shape.max_weight
    if len(vertices) != K + 1:
        out.append(SpineError("length k(n-1)+1", f"expected {K + 1} vertices, got {len(vertices)}"))
    for i, v in enumerate(vertices):
        if not shape.contains(v):
            out.append(SpineError("in grid", f"s^{i} = {tuple(v)} is not a grid point"))
            return out
    if vertices and tuple(vertices[0]) != shape.bottom:
        out.append(SpineError("s^0 = bottom", f"s^0 = {tuple(vertices[0])}"))
    if vertices and tuple(vertices[-1]) != shape.top:
        out.append(SpineError("s^last = top", f"last vertex = {tuple(vertices[-1])}"))
    for i, v in enumerate(vertices):
        if hamming_weight(v) != i:
            out.append(SpineError("wt(s^i) = i", f"wt(s^{i}) = {hamming_weight(v)}"))
            break
    for i in range(len(vertices) - 1):
        a, b = vertices[i], vertices[i + 1]
        if not (leq(a, b) and tuple(a) != tuple(b)):
            out.append(SpineError("s^{i+1} > s^i", f"s^{i + 1} = {tuple(b)} is not above s^{i} = {tuple(a)}"))
            break
        diff = [y - x for x, y in zip(a, b)]
        if sorted(diff) != [0] * (len(diff) - 1) + [1]:
            out.append(SpineError("unit step", f"s^{i} -> s^{i + 1} is not a unit step"))
            break
    return out


class Spine:
    """Immutable spine; construction validates every invariant unless ``check=False``.

    Unchecked spines exist only so corrupted files can still be evaluated for
    diagnostics; they fall back to definitional linear scans.
    """

    def __init__(self, shape: GridShape, vertices: Sequence[Sequence[int]], check: bool = True):
        if shape.max_weight > MAX_SPINE_STEPS:
            raise ValueError(f"k(n-1) = {shape.max_weight} exceeds the spine memory guard {MAX_SPINE_STEPS}")
        self.shape = shape
        self.vertices: tuple[Point, ...] = tuple(tuple(int(x) for x in v) for v in vertices)
        self.valid = True
        if check:
            errors = spine_violations(shape, self.vertices)
            if errors:
                raise errors[0]
        else:
            self.valid = not spine_violations(shape, self.vertices)
        self.index: dict[Point, int] = {}
        for i, v in enumerate(self.vertices):
            self.index.setdefault(v, i)
        # coordinate that increases between s^i and s^{i+1}
        self.steps: tuple[int, ...] = ()
        if self.valid:
            self.steps = tuple(
                next(c for c in range(shape.k) if b[c] != a[c])
                for a, b in zip(self.vertices, self.vertices[1:])
            )

    def __len__(self):
        return len(self.vertices)

    def __getitem__(self, i: int) -> Point:
        return self.vertices[i]

    def __iter__(self):
        return iter(self.vertices)

    def __contains__(self, v) -> bool:
        return tuple(v) in self.index

    def __eq__(self, other):
        return isinstance(other, Spine) and self.shape == other.shape and self.vertices == other.vertices

    def __hash__(self):
        return hash((self.shape, self.vertices))

    def __repr__(self):
        return f"Spine(n={self.shape.n}, k={self.shape.k}, vertices={list(self.vertices)!r})"


def random_spine(shape: GridShape, rng: SeededRng) -> Spine:
    """A uniformly shuffled sequence of unit steps; not restricted to any tube."""
    steps = [c for c in range(shape.k) for _ in range(shape.n - 1)]
    rng.shuffle(steps)
    v = [0] * shape.k
    verts = [tuple(v)]
    for c in steps:
        v[c] += 1
        verts.append(tuple(v))
    return Spine(shape, verts)


@dataclass(frozen=True)
class HerringboneInstance:
    shape: GridShape
    spine: Spine
    j: int

    def __post_init__(self):
        if self.spine.shape != self.shape:
            raise ValueError("spine shape does not match instance shape")
        if not 0 <= self.j <= self.shape.max_weight:
            raise ValueError(f"fixed-point index j={self.j} outside [0, {self.shape.max_weight}]")

    @property
    def fixed_point(self) -> Point:
        return self.spine[self.j]

    def __call__(self, v: Sequence[int]) -> Point:
        return evaluate(self, v)


def mu_index(inst: HerringboneInstance, v: Sequence[int]) -> int:
    """Largest ``i`` with ``s^i <= v``.

    ``{i : s^i <= v}`` is a prefix of the index range because the spine is a
    chain, so a binary search finds its end.
    """
    verts = inst.spine.vertices
    if not inst.spine.valid:
        return mu_index_scan(inst, v)
    lo, hi = 0, len(verts) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if leq(verts[mid], v):
            lo = mid
        else:
            hi = mid - 1
    return lo


def big_m_index(inst: HerringboneInstance, v: Sequence[int]) -> int:
    """Smallest ``i`` with ``s^i >= v`` (the matching set is a suffix)."""
    verts = inst.spine.vertices
    if not inst.spine.valid:
        return big_m_index_scan(inst, v)
    lo, hi = 0, len(verts) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if leq(v, verts[mid]):
            hi = mid
        else:
            lo = mid + 1
    return lo


def mu_index_scan(inst: HerringboneInstance, v: Sequence[int]) -> int:
    return max(i for i, s in enumerate(inst.spine.vertices) if leq(s, v))


def big_m_index_scan(inst: HerringboneInstance, v: Sequence[int]) -> int:
    return min(i for i, s in enumerate(inst.spine.vertices) if leq(v, s))


def evaluate(inst: HerringboneInstance, v: Sequence[int]) -> Point:
    v = tuple(v)
    spine = inst.spine
    i = spine.index.get(v)
    if i is not None:
        if i == inst.j:
            return v
        return spine[i + 1] if i < inst.j else spine[i - 1]
    mu = mu_index(inst, v)
    big_m = big_m_index(inst, v)
    out = list(v)
    if spine.valid:
        out[spine.steps[mu]] += 1
        out[spine.steps[big_m - 1]] -= 1
    else:
        verts = spine.vertices
        for c in range(len(out)):
            out[c] += (verts[mu + 1][c] - verts[mu][c]) - (verts[big_m][c] - verts[big_m - 1][c])
    return tuple(out)


def invert_instance(inst: HerringboneInstance) -> HerringboneInstance:
    """Reflect the instance through the grid centre.

    The reflected spine is ``t^i = top - s^{K-i}`` with index ``K - j``; its
    function satisfies ``h_t(v) = top - h_s(top - v)``.
    """
    shape = inst.shape
    K = shape.max_weight
    verts = [shape.invert(inst.spine[K - i]) for i in range(K + 1)]
    return HerringboneInstance(shape, Spine(shape, verts), K - inst.j)


@dataclass
class VerificationReport:
    monotone: bool = True
    monotone_counterexample: Optional[tuple] = None
    fixed_points: list = field(default_factory=list)
    expected_fixed_point: Optional[Point] = None
    displacement_ok: bool = True
    displacement_counterexample: Optional[tuple] = None
    range_ok: bool = True
    range_counterexample: Optional[tuple] = None
    scanned: int = 0

    @property
    def unique_fixed_point(self) -> bool:
        if len(self.fixed_points) != 1:
            return False
        return self.expected_fixed_point is None or self.fixed_points[0] == self.expected_fixed_point

    @property
    def ok(self) -> bool:
        return self.monotone and self.unique_fixed_point and self.displacement_ok and self.range_ok

    def failures(self) -> list[str]:
        out = []
        if not self.range_ok:
            out.append(f"value out of grid: f{self.range_counterexample[0]} = {self.range_counterexample[1]}")
        if not self.monotone:
            v, w, fv, fw = self.monotone_counterexample
            out.append(f"not monotone: {v} <= {w} but f{v} = {fv} is not <= f{w} = {fw}")
        if not self.unique_fixed_point:
            want = "one" if self.expected_fixed_point is None else f"[{self.expected_fixed_point}]"
            out.append(f"fixed points {self.fixed_points}, expected exactly {want}")
        if not self.displacement_ok:
            v, fv = self.displacement_counterexample
            out.append(f"off-spine vertex {v} maps to {fv}, not a +1/-1 move")
        return out


def _is_plus_minus_move(v: Point, fv: Point) -> bool:
    diff = sorted(b - a for a, b in zip(v, fv))
    return diff == [-1] + [0] * (len(diff) - 2) + [1]


def verify_map(
    shape: GridShape,
    f: Callable[[Point], Sequence[int]] | Mapping[Point, Sequence[int]],
    expected_fixed_point: Optional[Point] = None,
    off_spine: Optional[Callable[[Point], bool]] = None,
    max_points: int = MAX_SCAN,
) -> VerificationReport:
    """Exhaustively check a grid map for monotonicity and its fixed points.

    Monotonicity uses the neighbour criterion ``f(v) <= f(v + e_c)``, which is
    enough because the order is generated by unit steps.  ``off_spine``
    selects the vertices whose image must be a ``+e_a - e_b`` move.
    """
    if shape.size > max_points:
        raise ScanBudgetError(f"n^k = {shape.size} exceeds the scan budget {max_points}")
    get = f.__getitem__ if isinstance(f, Mapping) else f
    values: dict[Point, Point] = {}
    rep = VerificationReport(expected_fixed_point=expected_fixed_point)
    for v in shape.points():
        fv = tuple(get(v))
        values[v] = fv
        if rep.range_ok and not shape.contains(fv):
            rep.range_ok = False
            rep.range_counterexample = (v, fv)
        if fv == v:
            rep.fixed_points.append(v)
        elif off_spine is not None and off_spine(v) and rep.displacement_ok and not _is_plus_minus_move(v, fv):
            rep.displacement_ok = False
            rep.displacement_counterexample = (v, fv)
    rep.scanned = len(values)
    for v, fv in values.items():
        for c in range(shape.k):
            if v[c] == shape.n - 1:
                continue
            w = v[:c] + (v[c] + 1,) + v[c + 1:]
            fw = values[w]
            if not leq(fv, fw):
                rep.monotone = False
                rep.monotone_counterexample = (v, w, fv, fw)
                return rep
    return rep


def verify_instance(inst: HerringboneInstance, max_points: int = MAX_SCAN) -> VerificationReport:
    spine = inst.spine
    return verify_map(
        inst.shape,
        lambda v: evaluate(inst, v),
        expected_fixed_point=spine[inst.j] if spine.valid else None,
        off_spine=lambda v: v not in spine.index,
        max_points=max_points,
    )
