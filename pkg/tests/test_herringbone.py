import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import S, all_points, big_m_scan, herringbone_by_definition, mu_scan
from tarski_lab.herringbone import (
    HerringboneInstance,
    Spine,
    SpineError,
    big_m_index,
    evaluate,
    invert_instance,
    mu_index,
    random_spine,
    spine_violations,
    verify_instance,
    verify_map,
)
from tarski_lab.lattice import GridShape
from tarski_lab.rng import SeededRng

SHAPE = GridShape(3, 2)


def inst_s(j=2):
    return HerringboneInstance(SHAPE, Spine(SHAPE, S), j)


def test_mu_and_big_m_examples():
    inst = inst_s()
    assert mu_index(inst, (1, 0)) == 0
    assert mu_index(inst, (2, 2)) == 4
    assert mu_index(inst, (0, 2)) == 1
    assert big_m_index(inst, (1, 0)) == 2
    assert big_m_index(inst, (0, 0)) == 0
    assert big_m_index(inst, (0, 2)) == 4


def test_evaluate_examples():
    inst = inst_s()
    assert evaluate(inst, (1, 1)) == (1, 1)
    assert evaluate(inst, (0, 0)) == (0, 1)
    assert evaluate(inst, (1, 0)) == (0, 1)
    assert evaluate(inst, (2, 0)) == (1, 1)


def test_evaluate_matches_definition_on_tiny_grid():
    for j in range(5):
        inst = inst_s(j)
        for v in all_points(3, 2):
            assert evaluate(inst, v) == herringbone_by_definition(S, j, v)


def test_verify_instance_passes_on_s():
    rep = verify_instance(inst_s())
    assert rep.ok and rep.fixed_points == [(1, 1)] and rep.scanned == 9


def test_corrupted_map_fails_monotonicity():
    inst = inst_s()
    table = {v: evaluate(inst, v) for v in all_points(3, 2)}
    table[(0, 0)] = (2, 2)
    table[(0, 1)] = (1, 1)
    rep = verify_map(SHAPE, table)
    assert not rep.monotone
    assert any("not monotone" in m for m in rep.failures())


def test_inversion_examples():
    inv = invert_instance(inst_s())
    assert list(inv.spine) == S and inv.j == 2
    sh = Spine(SHAPE, [(0, 0), (1, 0), (2, 0), (2, 1), (2, 2)])
    inv = invert_instance(HerringboneInstance(SHAPE, sh, 0))
    assert list(inv.spine) == [(0, 0), (0, 1), (0, 2), (1, 2), (2, 2)] and inv.j == 4
    assert invert_instance(inv).spine == sh and invert_instance(inv).j == 0


def test_spine_violation_names():
    with pytest.raises(SpineError) as e:
        Spine(SHAPE, [(0, 0), (0, 1), (2, 1), (2, 1), (2, 2)])
    assert e.value.invariant == "wt(s^i) = i"
    names = {v.invariant for v in spine_violations(SHAPE, [(0, 0), (1, 0), (2, 2)])}
    assert "length k(n-1)+1" in names


def test_k_equals_one_is_forced_spine():
    shape = GridShape(2, 1)
    inst = HerringboneInstance(shape, Spine(shape, [(0,), (1,)]), 1)
    assert evaluate(inst, (0,)) == (1,)
    assert verify_instance(inst).fixed_points == [(1,)]


def test_j_out_of_range():
    with pytest.raises(ValueError):
        inst_s(5)


@st.composite
def instances(draw):
    n = draw(st.integers(2, 6))
    k = draw(st.integers(1, 4))
    seed = draw(st.integers(0, 2**32))
    rng = SeededRng(seed)
    shape = GridShape(n, k)
    spine = random_spine(shape, rng)
    return HerringboneInstance(shape, spine, rng.randint(0, shape.max_weight))


@settings(max_examples=200, deadline=None)
@given(instances(), st.data())
def test_binary_search_indices_match_scan(inst, data):
    v = tuple(data.draw(st.integers(0, inst.shape.n - 1)) for _ in range(inst.shape.k))
    verts = list(inst.spine)
    assert mu_index(inst, v) == mu_scan(verts, v)
    assert big_m_index(inst, v) == big_m_scan(verts, v)


@settings(max_examples=60, deadline=None)
@given(instances())
def test_random_spine_instances_verify(inst):
    rep = verify_instance(inst)
    assert rep.ok, rep.failures()


@settings(max_examples=60, deadline=None)
@given(instances())
def test_on_spine_law_and_inversion_identity(inst):
    K = inst.shape.max_weight
    for i, s in enumerate(inst.spine):
        if i != inst.j:
            step = 1 if i < inst.j else -1
            assert evaluate(inst, s) == inst.spine[i + step]
    inv = invert_instance(inst)
    top = inst.shape.top
    for v in all_points(inst.shape.n, inst.shape.k):
        flipped = tuple(t - x for t, x in zip(top, v))
        lhs = evaluate(inv, v)
        rhs = tuple(t - x for t, x in zip(top, evaluate(inst, flipped)))
        assert lhs == rhs
    assert inv.fixed_point == inst.shape.invert(inst.fixed_point)
    assert invert_instance(inv).spine == inst.spine and invert_instance(inv).j == inst.j
    assert len(inv.spine) == K + 1


def test_response_set_size_bound_random_spines():
    shape = GridShape(4, 3)
    rng = SeededRng(11)
    probes = [(1, 2, 0), (3, 0, 1), (2, 2, 2), (0, 3, 3)]
    seen = {v: set() for v in probes}
    for _ in range(400):
        inst = HerringboneInstance(shape, random_spine(shape, rng), rng.randint(0, shape.max_weight))
        for v in probes:
            seen[v].add(evaluate(inst, v))
    assert max(len(s) for s in seen.values()) <= 3 * 3 + 3 + 1
