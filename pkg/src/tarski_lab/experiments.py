"""Runnable pieces of the lower-bound argument.

Ordered search and the simulation that turns a Tarski solver into an
ordered-search algorithm, Monte Carlo estimates of how often a random
rasterized segment hits a vertex, survey statistics over solver runs, exact
posterior progress traces on tiny grids, and the asymptotic bound curves.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .construction import (
    TubeParams,
    build_spine,
    ConnectingPoints,
    in_tube,
    low_slice_points,
    rasterize_segment,
    region_index,
    sample_instance_u,
    sample_low_uniform,
)
from .herringbone import HerringboneInstance, Spine, evaluate
from .lattice import Point, hamming_weight
from .oracle import CountingOracle
from .rng import SeededRng
from .solvers import SolveReport, SolverFailure

# ----------------------------------------------------------- ordered search


class Answer(enum.Enum):
    YES = "yes"
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class OrderedSearchInstance:
    """Length-``m`` bit vector with its single 1 at 1-based position ``hidden``."""

    m: int
    hidden: int

    def __post_init__(self):
        if not 1 <= self.hidden <= self.m:
            raise ValueError(f"hidden position {self.hidden} outside [1, {self.m}]")


def ordered_search_query(inst: OrderedSearchInstance, i: int) -> Answer:
    if not 1 <= i <= inst.m:
        raise IndexError(f"query position {i} outside [1, {inst.m}]")
    if i == inst.hidden:
        return Answer.YES
    return Answer.LEFT if i > inst.hidden else Answer.RIGHT


# -------------------------------------------------------------- reduction


class _Halt(Exception):
    pass


@dataclass
class ReductionState:
    spine: Spine
    theta: int
    a: int
    b: int
    history: list = field(default_factory=list)


@dataclass
class ReductionResult:
    index: int
    halted_on_yes: bool
    ordered_queries: int
    spine_regions: list
    state: ReductionState
    solver_report: Optional[SolveReport]
    tarski_queries: int


class _SimulatedOracle:
    """Answers a Tarski solver's queries without knowing the fixed-point index."""

    def __init__(self, params: TubeParams, spine: Spine, os_inst: OrderedSearchInstance, state: ReductionState):
        self.shape = params.shape
        self.params = params
        self.spine = spine
        self.os_inst = os_inst
        self.state = state
        self.answers: dict[int, Answer] = {}
        self.regions: list[int] = []
        self.count = 0
        self.audit_target: Optional[int] = None

    def query(self, v: Sequence[int]) -> Point:
        v = self.shape.check(v)
        self.count += 1
        st = self.state
        if v not in self.spine:
            # off-spine values do not depend on the fixed-point index
            return evaluate(HerringboneInstance(self.shape, self.spine, 0), v)
        pos = region_index(v, self.params) // self.params.rho + 1
        ans = self.answers.get(pos)
        if ans is None:
            ans = ordered_search_query(self.os_inst, pos)
            self.answers[pos] = ans
            self.regions.append(pos)
        if ans is Answer.YES:
            raise _Halt
        wt = hamming_weight(v)
        if ans is Answer.LEFT:
            st.b = min(st.b, wt - 1)
        else:
            st.a = max(st.a, wt + 1)
        st.history.append((v, ans, st.a, st.b))
        if st.a > st.b:
            raise SolverFailure(f"reduction interval became empty: [{st.a}, {st.b}]")
        if self.audit_target is not None and not st.a <= self.audit_target <= st.b:
            raise SolverFailure(f"hidden index {self.audit_target} left [{st.a}, {st.b}]")
        return evaluate(HerringboneInstance(self.shape, self.spine, st.a), v)


def reduce_tarski_to_ordered_search(
    solver: Callable, os_inst: OrderedSearchInstance, params: TubeParams, rng: SeededRng,
    audit: bool = False,
) -> ReductionResult:
    """Solve ordered search by running a Tarski solver on a synthetic instance.

    Position ``p`` of the ordered-search vector stands for the region with
    base ``rho (p-1)``; the hidden fixed-point index is ``rho (hidden-1) + theta``
    and is never used to answer queries.  Each region costs one ordered-search
    query.  With ``audit`` the simulator checks after every answer that the
    hidden index still lies in the interval ``[a, b]``.
    """
    m = params.num_regions
    if os_inst.m != m:
        raise ValueError(f"ordered-search length {os_inst.m} != number of regions {m}")
    cp = ConnectingPoints({a: sample_low_uniform(a, params, rng) for a in params.index_set})
    spine = build_spine(cp, params)
    theta = rng.randbelow(params.rho)
    state = ReductionState(spine, theta, 0, params.shape.max_weight)
    oracle = _SimulatedOracle(params, spine, os_inst, state)
    if audit:
        oracle.audit_target = params.rho * (os_inst.hidden - 1) + theta
    try:
        report = solver(oracle)
    except _Halt:
        return ReductionResult(os_inst.hidden, True, len(oracle.answers), oracle.regions, state, None, oracle.count)
    if report.answer is None:
        index = 0
    else:
        index = region_index(report.answer, params) // params.rho + 1
    return ReductionResult(index, False, len(oracle.answers), oracle.regions, state, report, oracle.count)


# --------------------------------------------------------- hit probability


def hit_bound(k: int, L: int) -> Fraction:
    return Fraction(17**k, (2 * L + 1) ** (k // 2))


@dataclass
class HitProbabilityReport:
    a: int
    b: int
    samples: int
    hits: dict
    bound: Fraction
    weights_in_range: bool

    @property
    def frequencies(self) -> dict:
        return {w: h / self.samples for w, h in self.hits.items()}

    @property
    def capped_bound(self) -> Fraction:
        return min(Fraction(1), self.bound)

    @property
    def max_frequency(self) -> float:
        return max(self.frequencies.values(), default=0.0)


def mid_slice_witnesses(a: int, b: int, params: TubeParams, count: int) -> list[Point]:
    """Tube points closest in weight to the middle of ``[a, b]``."""
    mid = (a + b) // 2
    out: list[Point] = []
    for off in range(0, b - a + 1):
        for wt in sorted({mid - off, mid + off}):
            if a <= wt <= b:
                out.extend(low_slice_points(wt, params.shape, params.L))
        if len(out) >= count:
            break
    return out[:count]


def estimate_hit_probability(
    a: int,
    b: int,
    params: TubeParams,
    witnesses: Sequence[Sequence[int]],
    samples: int,
    rng: SeededRng,
) -> HitProbabilityReport:
    """Monte Carlo frequency with which the rasterized path from a uniform
    point of slice ``a`` to one of slice ``b`` passes through each witness."""
    K = params.shape.max_weight
    k, L = params.k, params.L
    if not 0 < a < b < K:
        raise ValueError(f"need interior slices 0 < a < b < {K}, got a={a}, b={b}")
    if b - a < 12 * k * L:
        raise ValueError(f"need b - a >= 12kL = {12 * k * L}, got {b - a}")
    ws = [tuple(w) for w in witnesses]
    targets = set(ws)
    hits = {w: 0 for w in ws}
    ok = True
    for _ in range(samples):
        u = sample_low_uniform(a, params, rng)
        v = sample_low_uniform(b, params, rng)
        path = rasterize_segment(u, v)
        for p in path:
            if p in targets:
                hits[p] += 1
        if ok and not all(a <= hamming_weight(p) <= b for p in path):
            ok = False
    return HitProbabilityReport(a, b, samples, hits, hit_bound(k, L), ok)


# ----------------------------------------------------------------- surveys


@dataclass
class SurveyReport:
    regions_touched: frozenset
    far_subset: list
    queries: int
    success: bool


def far_subset(bases: Sequence[int], rho: int, min_dist: int = 5) -> list[int]:
    """Largest set of region bases pairwise at least ``min_dist`` regions apart.

    Greedy left-to-right selection is optimal for points on a line.
    """
    chosen: list[int] = []
    for base in sorted(set(bases)):
        if not chosen or base - chosen[-1] >= min_dist * rho:
            chosen.append(base)
    return chosen


def survey_run(solver: Callable, inst: HerringboneInstance, params: TubeParams) -> SurveyReport:
    oracle = CountingOracle(inst)
    rep = solver(oracle)
    touched = frozenset(region_index(q, params) for q in oracle.transcript.queries() if q in inst.spine)
    return SurveyReport(touched, far_subset(touched, params.rho), oracle.count, rep.success)


def survey_census(solver: Callable, params: TubeParams, trials: int, rng: SeededRng) -> list[SurveyReport]:
    return [survey_run(solver, sample_instance_u(params, rng), params) for _ in range(trials)]


# --------------------------------------------------------- progress traces

MAX_ENSEMBLE = 10**6
MAX_TUPLE_M = 4
MAX_TRACE_REGIONS = 24


@dataclass
class ProgressTrace:
    """Per-step progress measures; index 0 is before any query.

    ``P[t][base]`` is the log2 of the largest posterior probability that a
    tube vertex of that region is on the spine, ``P_star`` its running max,
    and ``P_bar`` the best sum of ``P_star`` over region tuples pairwise at
    least five regions apart (``None`` if no such tuple exists).
    """

    instance: HerringboneInstance
    queries: list
    P: list
    P_star: list
    P_bar: list
    out_of_tube: list
    ensemble_size: int
    m: int
    per_query_cap: float


class EnsembleTooLarge(ValueError):
    pass


def _region_tuples(bases: Sequence[int], rho: int, m: int) -> list[tuple]:
    return [t for t in itertools.combinations(sorted(bases), m)
            if all(y - x >= 5 * rho for x, y in zip(t, t[1:]))]


def posterior_progress_trace(
    solver: Callable, params: TubeParams, rng: SeededRng, m: int = 1,
    instance: Optional[HerringboneInstance] = None,
) -> ProgressTrace:
    """Replay a solver and compute exact posteriors after every query.

    The posterior is over the whole family: every connecting-point tuple with
    every fixed-point index, under the uniform prior.  For each spine the set
    of indices consistent with the transcript is an interval, so spines are
    enumerated once and carry an index interval.
    """
    if not 1 <= m <= MAX_TUPLE_M:
        raise ValueError(f"tuple size m must be in [1, {MAX_TUPLE_M}]")
    if params.num_regions > MAX_TRACE_REGIONS:
        raise ValueError(f"{params.num_regions} regions exceeds the tracer cap {MAX_TRACE_REGIONS}")
    shape, L, K = params.shape, params.L, params.shape.max_weight
    slices = {a: low_slice_points(a, shape, L) for a in params.index_set}
    size = math.prod(len(p) for p in slices.values())
    if size > MAX_ENSEMBLE:
        raise EnsembleTooLarge(f"{size} spines exceeds the exhaustive-posterior guard {MAX_ENSEMBLE}")

    keys = sorted(slices)
    spines = []
    for combo in itertools.product(*(slices[a] for a in keys)):
        spines.append(build_spine(ConnectingPoints(dict(zip(keys, combo))), params))
    if instance is None:
        instance = sample_instance_u(params, rng)
    oracle = CountingOracle(instance)
    solver(oracle)
    transcript = oracle.transcript.entries

    bases = list(params.region_bases)
    region_points = {
        base: [v for wt in range(base, base + params.rho + 1) for v in low_slice_points(wt, shape, L)]
        for base in bases
    }
    tuples = _region_tuples(bases, params.rho, m)
    lo = [0] * len(spines)
    hi = [K] * len(spines)
    alive = [True] * len(spines)

    def measures():
        mass: dict[Point, int] = {}
        total = 0
        for s, sp in enumerate(spines):
            if not alive[s]:
                continue
            w = hi[s] - lo[s] + 1
            total += w
            for v in sp.vertices:
                mass[v] = mass.get(v, 0) + w
        out = {}
        for base in bases:
            best = max(mass.get(v, 0) for v in region_points[base])
            out[base] = math.log2(best / total) if best else -math.inf
        return out

    P = [measures()]
    P_star = [dict(P[0])]
    for e in transcript:
        q, r = e.query, e.response
        for s, sp in enumerate(spines):
            if not alive[s]:
                continue
            i = sp.index.get(q)
            if i is None:
                if evaluate(HerringboneInstance(shape, sp, 0), q) != r:
                    alive[s] = False
                continue
            if r == q:
                nlo, nhi = i, i
            elif i + 1 <= K and r == sp[i + 1]:
                nlo, nhi = i + 1, K
            elif i >= 1 and r == sp[i - 1]:
                nlo, nhi = 0, i - 1
            else:
                alive[s] = False
                continue
            lo[s], hi[s] = max(lo[s], nlo), min(hi[s], nhi)
            if lo[s] > hi[s]:
                alive[s] = False
        cur = measures()
        P.append(cur)
        P_star.append({base: max(P_star[-1][base], cur[base]) for base in bases})
    P_bar = [max((sum(ps[b] for b in t) for t in tuples), default=None) for ps in P_star]
    return ProgressTrace(
        instance=instance,
        queries=[e.query for e in transcript],
        P=P,
        P_star=P_star,
        P_bar=P_bar,
        out_of_tube=[not in_tube(e.query, L) for e in transcript],
        ensemble_size=size * (K + 1),
        m=m,
        per_query_cap=15 * math.log2(shape.k) if shape.k > 1 else 0.0,
    )


# ------------------------------------------------------------ bound curves


def bound_curves(n: int, k: int, L: int, rho: int, c: float = 1.0, eps: float = 1.0) -> dict:
    """Scale functions of the lower and upper bounds (unit constants).

    ``d_lower_bound`` evaluates the explicit finite-n lower-bound expression
    with the existential constants ``c`` and ``eps`` supplied by the caller;
    it may be negative when ``n`` is far below the asymptotic regime.
    """
    if k < 2:
        raise ValueError("the lower-bound curve needs k >= 2 (log2 k = 0 at k = 1)")
    lg = math.log2
    regions = k * (n - 1) / rho
    d_lower = (
        eps**2
        * (math.floor(c / 5 * lg(regions)) - 2)
        * ((k // 2) * lg(2 * L + 1) - k * lg(17))
        / (60 * lg(k))
    )
    return {
        "lower": k * lg(n) ** 2 / lg(k),
        "upper": k * lg(n) * lg(n * k),
        "d_lower_bound": d_lower,
    }
