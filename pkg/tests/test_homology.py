import numpy as np
from hypothesis import given, settings, strategies as st

from fasrecon import construction, homology, metric
from fasrecon.homology import betti, build_complex, gf2_rank

from oracles import betti_oracle, components_oracle, gf2_rank_oracle
from strategies import fases


def test_antichain_level_has_only_vertices():
    fas = construction.build_ultra_fas(metric.gen_padic(2, 3))
    cx = build_complex(fas, len(fas))
    assert cx.counts() == [8, 0, 0]
    assert betti(cx) == (8, 0, 0)


def test_interval_level_two(interval4):
    cx = build_complex(interval4, 2)
    assert cx.counts() == [4, 3, 0]
    assert betti(cx)[:2] == (1, 0)


def test_single_vertex(interval4):
    assert betti(build_complex(interval4, 1)) == (1, 0, 0)


def test_cycle_graph():
    s = metric.gen_circle(7)
    fas = construction.Fas(s, (construction.FasLevel(construction.Fraction(1, 10),
                                                     construction.Fraction(0), tuple(s.points)),))
    cx = build_complex(fas, 1)
    assert cx.counts() == [7, 7, 0]
    assert betti(cx) == (1, 1, 0)


def test_report_shape(interval4):
    rep = homology.betti_report(interval4, 2)
    assert rep == {"level": 2, "eps": "1/3", "betti": [1, 0, 0], "simplices": [4, 3, 0]}


@settings(max_examples=200, deadline=None)
@given(st.lists(st.lists(st.integers(0, 1), min_size=6, max_size=6), min_size=0, max_size=8))
def test_gf2_rank_matches_numpy(rows):
    M = np.array(rows, dtype=np.uint8).reshape(len(rows), 6)
    cols = [int("".join(str(b) for b in reversed(M[:, j])), 2) if len(rows) else 0 for j in range(6)]
    assert gf2_rank(cols) == gf2_rank_oracle(M)


@settings(max_examples=80, deadline=None)
@given(fases(), st.data())
def test_betti_matches_oracles(fas, data):
    n = data.draw(st.integers(1, len(fas)))
    pts = fas.points(n)
    if len(pts) > 16:
        return
    cx = build_complex(fas, n)
    b = betti(cx)
    assert b == betti_oracle(fas.sample, pts, fas.eps(n), 2)
    assert b[0] == components_oracle(fas.sample, pts, 2 * fas.eps(n))
    assert sum((-1) ** k * v for k, v in enumerate(b)) == cx.euler_characteristic()
    assert all(v >= 0 for v in b)
