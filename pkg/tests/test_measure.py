from fractions import Fraction as F

import pytest

from selfsim import automaton as am
from selfsim.automaton import NotAdmissible
from selfsim.field import NumberField, RootBox
from selfsim.intervals import RatInterval
from selfsim.maps import IFS, ScaleBase, Similitude
from selfsim.measure import GlobalSystem, compute_mass_vectors
from selfsim.neighbors import NeighborDecider
from selfsim.oracle import word_sum_entry


def test_root_mass_is_one(pipelines):
    for name in ("cantor-1-3", "golden-bernoulli", "commensurable-osc"):
        model = pipelines(name).measure
        assert model.mass([0]) == 1
        assert model.v[0] == (F(1),)


def test_cantor_masses(cantor):
    model = cantor.measure
    for e in model.edges[0]:
        assert e.tmatrix == ((F(1, 2),),)
    for addr in model.addresses(3):
        assert model.mass(addr) == F(1, 8)


def test_cantor_biased_probabilities():
    K = NumberField([F(-1, 3), 1], RootBox(RatInterval(0, 1)))
    r = K.gen
    ifs = IFS(K, [Similitude(K, ((r,),), (K.zero,), 1),
                  Similitude(K, ((r,),), (K.from_rational(F(2, 3)),), 1)],
              [F(1, 3), F(2, 3)], ScaleBase(K, ratio=r))
    model = compute_mass_vectors(am.build(ifs, NeighborDecider(ifs)))
    mats = sorted(e.tmatrix[0][0] for e in model.edges[0])
    assert mats == [F(1, 3), F(2, 3)]
    assert model.total_mass(6) == 1


def test_lebesgue_interval_lengths(lebesgue):
    model = lebesgue.measure
    # the null overlap states carry exact zeros and are pruned
    assert len(model.kept) == 5
    for d in range(1, 7):
        for addr in model.addresses(d):
            assert model.mass(addr) == F(1, 2**d)


def test_partition_of_unity_exact(pipelines):
    for name in ("cantor-1-3", "lebesgue-1-2", "golden-bernoulli",
                 "commensurable-osc"):
        model = pipelines(name).measure
        for d in range(0, 7):
            assert model.total_mass(d) == 1
        assert sum(model.mass(a) for a in model.addresses(5)) == 1


def test_parent_equals_sum_of_children(golden):
    model = golden.measure
    for addr in model.addresses(3):
        kids = [addr + (e.child,) for e in model.edges[addr[-1]]]
        assert model.mass(addr) == sum(model.mass(k) for k in kids)


def test_self_consistency_of_vectors(pipelines):
    for name in ("golden-bernoulli", "commensurable-osc", "complex-pisot-demo"):
        model = pipelines(name).measure
        for sid in model.kept:
            acc = [F(0)] * model.star_dim(sid)
            for e in model.edges[sid]:
                vs = model.v_star(e.child)
                for i in range(len(acc)):
                    acc[i] += sum(e.tmatrix[i][j] * vs[j] for j in range(len(vs)))
            assert tuple(acc) == model.v_star(sid)


def test_transition_matrix_errors(cantor):
    model = cantor.measure
    with pytest.raises(NotAdmissible):
        model.transition_matrix(1, 0)
    with pytest.raises(NotAdmissible):
        model.mass([0, 99])


def test_restricted_columns_positive(pipelines):
    for name in ("golden-bernoulli", "complex-pisot-demo", "commensurable-osc"):
        model = pipelines(name).measure
        for sid in model.kept:
            for e in model.edges[sid]:
                cols = len(e.tmatrix[0])
                for j in range(cols):
                    assert any(e.tmatrix[i][j] > 0 for i in range(len(e.tmatrix)))


def test_u_vectors_positive(golden):
    model = golden.measure
    for addr in model.addresses(5):
        u = model.u_vector(addr)
        assert all(x > 0 for x in u)


def test_global_system_matches_mass(pipelines):
    for name in ("cantor-1-3", "lebesgue-1-2", "golden-bernoulli",
                 "commensurable-osc"):
        pipe = pipelines(name)
        model = pipe.measure
        gs = pipe.global_system
        assert gs.mass_global([0]) == 1
        for addr in model.addresses(4):
            assert gs.mass_global(addr) == model.mass(addr)


def test_global_dense_blocks(cantor):
    gs = GlobalSystem(cantor.measure)
    n = gs.size
    assert n == 3
    m1 = gs.matrix_dense(1)
    # only the column block of state eta_1 is populated
    assert sum(1 for i in range(n) for j in range(n) if m1[i][j] != 0) >= 1
    assert all(m1[i][0] == 0 for i in range(n))
    w = gs.weight_vector(1)
    assert all(x > 0 for x in w)


def test_product_entries_match_word_sums(cantor, golden):
    """Matrix products along a path equal brute-force word sums, exactly."""
    for pipe in (cantor, golden):
        model = pipe.measure
        ifs = pipe.ifs
        for depth in range(1, 5):
            for addr in model.addresses(depth):
                mat = model.product_matrix(addr)
                start = model.star_maps_absolute([0])
                end = model.star_maps_absolute(addr)
                for i, hi in enumerate(start):
                    for j, hj in enumerate(end):
                        target = hi.inverse().compose(hj)
                        assert mat[i][j] == word_sum_entry(ifs, target, depth)


def test_overlap_words_exist(golden):
    # entries built from two or more contributing words occur under overlap
    ifs = golden.ifs
    model = golden.measure
    found = False
    for addr in model.addresses(3):
        mat = model.product_matrix(addr)
        for row in mat:
            for x in row:
                if x > 0 and x not in (F(1, 8),):
                    found = True
    assert found
