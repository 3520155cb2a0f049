import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import S
from tarski_lab.construction import TubeParams, in_tube, sqrt_scaled_params, sample_instance_u
from tarski_lab.herringbone import HerringboneInstance, Spine, evaluate, random_spine
from tarski_lab.lattice import GridShape, ShapeError
from tarski_lab.oracle import (
    CountingOracle,
    QueryTranscript,
    outside_probes,
    query,
    simulate_outside_query,
)
from tarski_lab.rng import SeededRng
from tarski_lab.solvers import (
    BudgetError,
    SolverFailure,
    find_spine_vertex_by_weight,
    herringbone_query_bound,
    iteration_cap,
    solve_bruteforce,
    solve_herringbone,
    solve_kleene,
    spine_search_iteration_bound,
)

SHAPE = GridShape(3, 2)


def oracle_s(j=2, spine=S):
    return CountingOracle(HerringboneInstance(SHAPE, Spine(SHAPE, spine), j))


def test_query_counts_every_call():
    o = oracle_s()
    assert query(o, (0, 0)) == (0, 1) and o.count == 1
    query(o, (0, 0))
    assert o.count == 2
    with pytest.raises(ShapeError):
        o.query((3, 0))


def test_transcript_round_trip_and_replay():
    o = oracle_s()
    for v in [(0, 0), (1, 0), (2, 2)]:
        o.query(v)
    lines = o.transcript.to_lines()
    assert lines[0] == "1,0/0,0/1"
    t = QueryTranscript.from_lines(lines)
    assert t.entries == o.transcript.entries
    assert t.replays_against(o.instance)
    assert not t.replays_against(HerringboneInstance(SHAPE, Spine(SHAPE, S), 0))


def test_outside_probe_formulas():
    assert outside_probes((6, 0), 1) == ((2, 0), (6, 4))


def test_outside_simulation_worked_example():
    spine = [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)]
    o = oracle_s(1, spine)
    r = simulate_outside_query(o, (2, 0), 0)
    assert (r.a, r.b) == ((0, 0), (2, 2))
    assert r.determined and r.reconstructed == (1, 1) == evaluate(o.instance, (2, 0))
    assert o.count == 2
    with pytest.raises(ValueError):
        simulate_outside_query(o, (1, 1), 0)


@pytest.mark.parametrize("n,k,L,rho,strict", [(20, 3, 2, 57, False), (145, 2, 1, 24, True), (37, 3, 1, 36, True)])
def test_outside_simulation_when_spine_inside_tube(n, k, L, rho, strict):
    params = TubeParams(GridShape(n, k), L, rho, strict)
    rng = SeededRng(4)
    tested = 0
    while tested < 40:
        inst = sample_instance_u(params, rng)
        if not all(in_tube(s, L) for s in inst.spine):
            continue
        tested += 1
        for _ in range(25):
            v = tuple(rng.randbelow(n) for _ in range(k))
            if in_tube(v, L):
                continue
            r = simulate_outside_query(CountingOracle(inst), v, L)
            assert in_tube(r.a, L) and in_tube(r.b, L)
            assert all(x <= y <= z for x, y, z in zip(r.a, v, r.b))
            if r.determined:
                assert r.reconstructed == evaluate(inst, v)


def test_outside_simulation_premise_is_needed():
    # with a spine that leaves the tube the reconstruction can be wrong
    params = sqrt_scaled_params(145, 2)
    rng = SeededRng(5)
    wrong = 0
    for _ in range(100):
        inst = sample_instance_u(params, rng)
        if all(in_tube(s, 1) for s in inst.spine):
            continue
        for _ in range(50):
            v = tuple(rng.randbelow(145) for _ in range(2))
            if not in_tube(v, 1):
                r = simulate_outside_query(CountingOracle(inst), v, 1)
                wrong += r.determined and r.reconstructed != evaluate(inst, v)
    assert wrong > 0


def test_brute_force_examples():
    assert solve_bruteforce(oracle_s()).answer == (1, 1)
    shape = GridShape(2, 1)
    o = CountingOracle(HerringboneInstance(shape, Spine(shape, [(0,), (1,)]), 1))
    assert solve_bruteforce(o).answer == (1,)
    big = GridShape(1001, 2)
    with pytest.raises(BudgetError):
        solve_bruteforce(CountingOracle(HerringboneInstance(big, random_spine(big, SeededRng(0)), 0)))


def test_kleene_examples():
    o = oracle_s()
    rep = solve_kleene(o)
    assert rep.answer == (1, 1) and rep.queries == 3 == o.count
    assert o.transcript.to_lines() == ["1,0/0,0/1", "2,0/1,1/1", "3,1/1,1/1"]
    assert solve_kleene(oracle_s(0)).queries == 1


def test_kleene_rejects_non_monotone_oracle():
    class Bad:
        shape = SHAPE

        def query(self, v):
            return (0, 0) if v == (0, 1) else (0, 1)

    with pytest.raises(SolverFailure):
        solve_kleene(Bad())


def test_spine_search_examples():
    o = oracle_s()
    r = find_spine_vertex_by_weight(o, 2)
    assert (r.vertex, r.iterations, o.count) == ((1, 1), 1, 1)
    o = oracle_s(4, [(0, 0), (1, 0), (2, 0), (2, 1), (2, 2)])
    r = find_spine_vertex_by_weight(o, 2, record=True)
    assert r.vertex == (2, 0) and r.image == (2, 1) and o.count == 2
    assert r.states[0][3] == 1
    o = oracle_s()
    assert find_spine_vertex_by_weight(o, 0).vertex == (0, 0) and o.count == 1


def test_herringbone_solver_example():
    o = oracle_s()
    rep = solve_herringbone(o)
    assert rep.answer == (1, 1) and o.count == 1


@st.composite
def random_instances(draw):
    n = draw(st.integers(2, 40))
    k = draw(st.integers(1, 5))
    rng = SeededRng(draw(st.integers(0, 2**32)))
    shape = GridShape(n, k)
    return HerringboneInstance(shape, random_spine(shape, rng), rng.randint(0, shape.max_weight))


@settings(max_examples=150, deadline=None)
@given(random_instances())
def test_solvers_find_fixed_point_within_bounds(inst):
    shape = inst.shape
    o = CountingOracle(inst)
    rep = solve_herringbone(o)
    assert rep.answer == inst.fixed_point
    assert o.count <= herringbone_query_bound(shape)
    assert max(rep.inner_iterations) <= spine_search_iteration_bound(shape)
    o = CountingOracle(inst)
    assert solve_kleene(o).answer == inst.fixed_point
    assert o.count <= shape.max_weight + 1


def test_iteration_cap_value():
    assert iteration_cap(GridShape(145, 2)) == 8 * 2 * (math.ceil(math.log2(145)) + 2)
