from fractions import Fraction as F

import pytest

from selfsim import automaton as am
from selfsim.automaton import NotAdmissible
from selfsim.field import NumberField, RootBox
from selfsim.intervals import RatInterval
from selfsim.maps import IFS, ScaleBase, Similitude
from selfsim.neighbors import NeighborDecider
from selfsim.oracle import canonical_words


def test_root_state(cantor):
    root = am.root_state(cantor.ifs)
    assert root.v_size == 1 and root.u_size == 1
    assert root.umaps[0].is_identity() and root.rmap.is_identity()
    assert cantor.automaton.resolve([0]) == root
    assert len(cantor.automaton.edges[0]) >= 1


def test_single_map_recurs():
    K = NumberField([-1, 1, 1], RootBox(RatInterval(0, 1)))
    s = Similitude(K, ((K.gen,),), (K.zero,), 1)
    ifs = IFS(K, [s], [F(1)], ScaleBase(K, ratio=K.gen))
    auto = am.build(ifs, NeighborDecider(ifs))
    assert len(auto.states) == 2
    assert auto.edges[1][0].child == 1


def test_cantor_structure(cantor):
    auto = cantor.automaton
    # root plus one state per step map; every state has two children with
    # singleton covering and touching lists
    assert len(auto.states) == 3
    for sid, st in enumerate(auto.states):
        assert len(auto.edges[sid]) == 2
        if sid:
            assert st.v_size == 1 and st.u_size == 1
    assert len(auto.addresses(5)) == 32
    assert len(set(auto.addresses(5))) == 32


def test_half_overlap_child(lebesgue):
    auto = lebesgue.automaton
    root_children = [auto.states[e.child] for e in auto.edges[0]]
    assert any(st.v_size == 2 for st in root_children)


def test_golden_fixture(golden):
    # regression fixture; the measure and oracle suites cross-check it
    auto = golden.automaton
    assert len(auto.states) == 22
    assert len(auto.addresses(4)) == 39


def test_build_deterministic(golden):
    ifs = golden.ifs
    a1 = am.build(ifs, NeighborDecider(ifs))
    a2 = am.build(ifs, NeighborDecider(ifs))
    assert [s.key() for s in a1.states] == [s.key() for s in a2.states]
    assert [[e.child for e in es] for es in a1.edges] == \
           [[e.child for e in es] for es in a2.edges]


def test_resolve_roundtrip_and_errors(cantor):
    auto = cantor.automaton
    for addr in auto.addresses(4):
        st = auto.resolve(addr)
        assert st is auto.states[addr[-1]]
    with pytest.raises(NotAdmissible):
        auto.resolve([1])
    with pytest.raises(NotAdmissible):
        auto.resolve([0, 0])


def test_sibling_distinctness(pipelines):
    for name in ("cantor-1-3", "lebesgue-1-2", "golden-bernoulli",
                 "commensurable-osc"):
        auto = pipelines(name).automaton
        for es in auto.edges:
            kids = [auto.states[e.child].key() for e in es]
            assert len(kids) == len(set(kids))


def test_refinement_no_cylinder_lost(cantor, commensurable):
    # on separated systems every allowed child map appears in exactly one
    # signature, so column sums of the edge matrices add to one per row
    for pipe in (cantor, commensurable):
        auto = pipe.automaton
        for sid, st in enumerate(auto.states):
            for i in range(st.v_size):
                total = sum(t for e in auto.edges[sid] for t in e.tmatrix[i])
                assert total == 1


def test_order_matches_recomputed_words(golden, lebesgue):
    """Stored entry order along a path equals the canonical word order."""
    for pipe in (golden, lebesgue):
        auto = pipe.automaton
        ifs = pipe.ifs
        for depth in (1, 2, 3):
            table = canonical_words(ifs, depth)
            for addr in auto.addresses(depth):
                frame = None
                for sid in addr[1:]:
                    r = auto.states[sid].rmap
                    frame = r if frame is None else frame.compose(r)
                st = auto.states[addr[-1]]
                words = []
                for m in st.umaps:
                    absolute = frame.compose(m) if frame is not None else m
                    words.append(table[absolute.key()])
                assert words == sorted(words), (addr, words)


def test_state_entries_lie_in_gamma(golden):
    gamma = {m.key() for m in golden.decider.gamma_maps()}
    for st in golden.automaton.states:
        for m in st.umaps:
            assert m.key() in gamma


def test_state_tags_zero_for_equicontractive(golden):
    for st in golden.automaton.states:
        assert all(t == 0 for t in st.utags)


def test_commensurable_tags_in_band(commensurable):
    kmax = commensurable.ifs.k_max
    seen = set()
    for st in commensurable.automaton.states:
        for t in st.utags:
            assert 0 <= t < kmax
            seen.add(t)
    assert seen == {0, 1}


def test_witness_root(cantor):
    w = am.witness(cantor.automaton, 0)
    assert w is not None
    assert w.point[0].is_rational()


def test_witness_cantor_children(cantor):
    auto = cantor.automaton
    pts = set()
    for e in auto.edges[0]:
        w = am.witness(auto, e.child)
        assert w is not None and w.separation_certified
        pts.add(float(w.point[0]))
    assert pts <= {0.0, 1.0, 1/3, 2/3} and pts


def test_witness_overlap_point(lebesgue):
    auto = lebesgue.automaton
    for sid, st in enumerate(auto.states):
        if st.v_size == 2 and sid in [e.child for e in auto.edges[0]]:
            w = am.witness(auto, sid)
            assert w is not None
            assert w.point[0].as_rational() == F(1, 2)


def test_exports(golden):
    auto = golden.automaton
    dot = auto.to_dot()
    assert "digraph" in dot and f"s{len(auto.states)-1}" in dot
    data = auto.to_json_dict()
    assert len(data["states"]) == len(auto.states)
    assert all("T" in e for e in data["edges"])
