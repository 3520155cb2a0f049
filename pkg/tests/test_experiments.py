from fractions import Fraction
import math

import pytest

from tarski_lab.construction import TubeParams, region_index
from tarski_lab.experiments import (
    Answer,
    EnsembleTooLarge,
    OrderedSearchInstance,
    bound_curves,
    estimate_hit_probability,
    far_subset,
    hit_bound,
    mid_slice_witnesses,
    ordered_search_query,
    posterior_progress_trace,
    reduce_tarski_to_ordered_search,
    survey_census,
)
from tarski_lab.lattice import GridShape
from tarski_lab.rng import SeededRng
from tarski_lab.solvers import SolveReport, solve_herringbone, solve_kleene

P10 = TubeParams(GridShape(10, 2), 1, 6, strict=False)
P13 = TubeParams(GridShape(13, 2), 1, 6, strict=False)


def test_ordered_search_examples():
    inst = OrderedSearchInstance(4, 3)
    assert ordered_search_query(inst, 2) is Answer.RIGHT
    assert ordered_search_query(inst, 3) is Answer.YES
    assert ordered_search_query(inst, 4) is Answer.LEFT
    with pytest.raises(IndexError):
        ordered_search_query(inst, 5)
    with pytest.raises(ValueError):
        OrderedSearchInstance(4, 0)


def test_reduction_returns_hidden_and_counts_regions():
    for hidden in (1, 2, 3):
        for seed in range(30):
            res = reduce_tarski_to_ordered_search(
                solve_herringbone, OrderedSearchInstance(3, hidden), P10, SeededRng(seed), audit=True
            )
            assert res.index == hidden
            assert res.ordered_queries == len(set(res.spine_regions)) == len(res.spine_regions)
            for _, _, a, b in res.state.history:
                assert a <= 6 * (hidden - 1) + res.state.theta <= b


def test_reduction_checks_length():
    with pytest.raises(ValueError):
        reduce_tarski_to_ordered_search(solve_herringbone, OrderedSearchInstance(4, 1), P10, SeededRng(0))


def test_hit_bound_values():
    assert hit_bound(2, 12) == Fraction(289, 25)
    assert min(1, hit_bound(2, 12)) == 1
    assert hit_bound(2, 145) == Fraction(289, 291)


def test_hit_probability_small_run():
    params = TubeParams(GridShape(300, 2), 12, 598, strict=False)
    below = [(70, 71)]
    ws = mid_slice_witnesses(156, 444, params, 10) + below
    rep = estimate_hit_probability(156, 444, params, ws, 300, SeededRng(1))
    assert rep.weights_in_range
    assert rep.hits[(70, 71)] == 0
    assert all(0 <= f <= 1 for f in rep.frequencies.values())
    with pytest.raises(ValueError):
        estimate_hit_probability(156, 200, params, ws, 10, SeededRng(1))


def test_far_subset_every_fifth():
    assert far_subset(range(0, 60, 6), 6) == [0, 30]
    touched = list(range(0, 6 * 23, 6))
    assert len(far_subset(touched, 6)) >= len(touched) // 5


def test_survey_census_examples():
    def bottom_only(oracle):
        oracle.query(oracle.shape.bottom)
        return SolveReport("bottom", None, 1, 1, False)

    for rep in survey_census(bottom_only, P13, 5, SeededRng(0)):
        assert rep.regions_touched == {0}
    rng = SeededRng(1)
    for rep in survey_census(solve_kleene, P13, 10, rng):
        assert rep.success
        top = max(rep.regions_touched)
        assert rep.regions_touched == set(range(0, top + 1, 6))


def test_posterior_trace_properties():
    tr = posterior_progress_trace(solve_herringbone, P13, SeededRng(3))
    for P in tr.P:
        assert all(x <= 0 for x in P.values())
    for base in P13.region_bases:
        seq = [ps[base] for ps in tr.P_star]
        assert seq == sorted(seq)
    for t, q in enumerate(tr.queries, 1):
        if q in tr.instance.spine:
            assert tr.P[t][region_index(q, P13)] == 0


def test_posterior_trace_singleton_ensemble():
    params = TubeParams(GridShape(3, 2), 0, 2, strict=False)
    tr = posterior_progress_trace(solve_kleene, params, SeededRng(0))
    assert all(x == 0 for x in tr.P[0].values())


def test_posterior_trace_guard():
    with pytest.raises(EnsembleTooLarge):
        posterior_progress_trace(solve_kleene, TubeParams(GridShape(145, 3), 1, 36, True), SeededRng(0))


def test_bound_curves():
    c = bound_curves(16, 2, 1, 6)
    assert (c["lower"], c["upper"]) == (32, 40)
    c = bound_curves(16, 4, 1, 12)
    assert (c["lower"], c["upper"]) == (32, 96)
    lows = [bound_curves(n, 3, 1, 3)["lower"] for n in (10, 20, 40, 80)]
    assert lows == sorted(lows)
    with pytest.raises(ValueError):
        bound_curves(16, 1, 1, 1)
    # explicit expression at c = eps = 1, 4 regions, L = 1, k = 2
    want = (math.floor(math.log2(4) / 5) - 2) * (math.log2(3) - 2 * math.log2(17)) / 60
    assert bound_curves(13, 2, 1, 6)["d_lower_bound"] == pytest.approx(want)
