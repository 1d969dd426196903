import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from fasrecon import construction, finspace, metric
from fasrecon.bonding import bond
from fasrecon.errors import CapExceeded, DiameterTooLarge, EmptySubset, LevelMismatch, NotInLevel
from fasrecon.finspace import SpaceElement, leq, make_element, min_nbhd

from oracles import subsets_oracle
from strategies import fases


def ids(fas, *labels):
    return [fas.sample.lookup(l) for l in labels]


def test_make_element(interval4):
    a, b = ids(interval4, "1/3", "2/3")
    assert make_element(interval4, 2, [a]).members == (a,)
    assert make_element(interval4, 2, [b, a, a]).members == tuple(sorted((a, b)))
    with pytest.raises(DiameterTooLarge):
        make_element(interval4, 2, ids(interval4, "0", "1"))
    with pytest.raises(EmptySubset):
        make_element(interval4, 2, [])
    with pytest.raises(NotInLevel):
        make_element(interval4, 2, ids(interval4, "1/2"))


def test_leq(interval4):
    a, b = ids(interval4, "1/3", "2/3")
    A, B, AB = (SpaceElement(2, m) for m in [(a,), (b,), tuple(sorted((a, b)))])
    assert leq(AB, AB) and leq(A, AB)
    assert not leq(A, B) and not leq(B, A)
    with pytest.raises(LevelMismatch):
        leq(A, SpaceElement(3, (a,)))


def test_min_nbhd_sizes():
    assert min_nbhd(SpaceElement(1, (4,))) == [SpaceElement(1, (4,))]
    assert {e.members for e in min_nbhd(SpaceElement(1, (1, 2)))} == {(1,), (2,), (1, 2)}
    for k in range(1, 11):
        assert len(min_nbhd(SpaceElement(1, tuple(range(k))))) == 2 ** k - 1


def test_enumerate_small_levels(interval4):
    assert [e.members for e in finspace.enumerate_level(interval4, 1)] == [(0,)]
    assert len(finspace.enumerate_level(interval4, 2)) == 7
    s = metric.gen_padic(3, 2)
    fas = construction.build_ultra_fas(s)
    for n in range(1, len(fas) + 1):
        elems = finspace.enumerate_level(fas, n)
        assert [e.members for e in elems] == [(p,) for p in sorted(fas.points(n))]


def test_enumerate_cap(interval4):
    with pytest.raises(CapExceeded) as exc:
        finspace.enumerate_level(interval4, 3, cap=10)
    assert exc.value.partial_count == 10


def test_check_monotone(interval4):
    elems = finspace.enumerate_level(interval4, 3)
    assert finspace.check_monotone(lambda C: C, elems).passed
    assert finspace.check_monotone(lambda C: bond(interval4, 2, C), elems).passed
    assert finspace.check_monotone(lambda C: SpaceElement(2, (0,)), elems).passed
    # dropping to the first member is not order preserving
    bad = finspace.check_monotone(lambda C: SpaceElement(3, C.members[-1:]), elems)
    assert not bad.passed and bad.witness


def test_level_space_hasse_and_exports(interval4):
    one = finspace.LevelSpace.build(interval4, 1)
    assert len(one.elements) == 1 and one.hasse_edges() == []
    two = finspace.LevelSpace.build(interval4, 2)
    assert len(two.elements) == 7 and len(two.hasse_edges()) == 6
    for i, j in two.hasse_edges():
        assert len(two.elements[j].members) == 2 and set(two.elements[i].members) < set(two.elements[j].members)
    doc = json.loads(finspace.export_poset(interval4, 2, "json"))
    back = finspace.LevelSpace.from_json(doc)
    assert back.elements == two.elements and back.to_json() == two.to_json()
    dot = finspace.export_poset(interval4, 2, "dot")
    assert dot.startswith("digraph") and dot.count("->") == 6 and 'label="{1/3,2/3}"' in dot


@settings(max_examples=120, deadline=None)
@given(fases(), st.data())
def test_enumeration_matches_subset_filter(fas, data):
    n = data.draw(st.integers(1, len(fas)))
    pts = fas.points(n)
    if len(pts) > 14:
        pts = pts[:14]
        got = {tuple(c) for c in finspace.small_cliques(fas.sample, pts, 2 * fas.eps(n))}
    else:
        got = {e.members for e in finspace.enumerate_level(fas, n)}
    assert got == subsets_oracle(fas.sample, pts, fas.eps(n))


@settings(max_examples=80, deadline=None)
@given(fases(), st.data())
def test_enumerated_elements_validate(fas, data):
    n = data.draw(st.integers(1, len(fas)))
    try:
        elems = finspace.enumerate_level(fas, n, cap=3000)
    except CapExceeded:
        return
    for e in elems:
        assert make_element(fas, n, e.members) == e
    assert len(set(elems)) == len(elems)
