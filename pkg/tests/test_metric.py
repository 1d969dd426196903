import itertools
import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from fasrecon import metric
from fasrecon.errors import MetricError, ParseError
from fasrecon.scalar import fmt_scalar, parse_scalar, ties

from oracles import ultra_witness_oracle
from strategies import small_samples, ultra_samples


def matrix_sample(rows):
    return metric.MetricSample(labels=tuple(map(str, range(len(rows)))),
                               matrix=tuple(tuple(F(v) for v in r) for r in rows))


# --- scalars ---


def test_parse_scalar_exact_and_float():
    assert parse_scalar("3/9") == F(1, 3) and isinstance(parse_scalar("3/9"), F)
    assert parse_scalar("7") == F(7)
    assert parse_scalar("0.25") == 0.25 and isinstance(parse_scalar("0.25"), float)
    for bad in ["nan", "inf", "abc", ""]:
        with pytest.raises(ValueError):
            parse_scalar(bad)


def test_fmt_scalar_round_trip():
    for v in [F(1, 3), F(2), F(0), F(-5, 7)]:
        assert parse_scalar(fmt_scalar(v)) == v
    assert fmt_scalar(F(2)) == "2/1"


def test_ties_exact_has_no_tolerance():
    assert not ties(F(1, 3), F(1, 3) + F(1, 10 ** 12))
    assert ties(1 / 3, 1 / 3 + 1e-15)


# --- validation ---


def test_one_point_sample_is_valid():
    assert metric.validate_metric(matrix_sample([[0]])).valid


def test_tight_triangle_is_valid():
    assert metric.validate_metric(metric.line_sample([F(0), F(1), F(3)])).valid


def test_triangle_violation_has_witness():
    s = matrix_sample([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    rep = metric.validate_metric(s)
    assert not rep.valid
    brute = {(a, b, c) for a, b, c in itertools.permutations(range(3), 3)
             if s.d(a, c) > s.d(a, b) + s.d(b, c)}
    assert {v.witness for v in rep.violations if v.kind == "triangle"} == brute
    assert (0, 1, 2) in brute


def test_symmetry_and_identity_violations():
    s = metric.MetricSample(labels=("a", "b"), matrix=((F(1), F(1)), (F(2), F(0))))
    kinds = {v.kind for v in metric.validate_metric(s).violations}
    assert {"identity", "symmetry"} <= kinds


# --- ultrametric ---


def test_padic_is_ultrametric():
    s = metric.gen_padic(3, 3)
    assert metric.is_ultrametric(s).is_ultrametric
    assert ultra_witness_oracle(s) is None


def test_grid_is_not_ultrametric_with_witness():
    s = metric.gen_interval_grid(9)
    rep = metric.is_ultrametric(s)
    assert not rep.is_ultrametric
    x, y, z = rep.witness
    assert s.d(x, y) > max(s.d(x, z), s.d(y, z))
    # the triple 0, 1/9, 2/9 violates the strong inequality
    assert s.d(0, 2) > max(s.d(0, 1), s.d(1, 2))


def test_two_points_ultrametric():
    assert metric.is_ultrametric(metric.line_sample([0, 1])).is_ultrametric


# --- generators ---


def test_interval_grid():
    s = metric.gen_interval_grid(3)
    assert [s.coords[i] for i in s.points] == [0, F(1, 3), F(2, 3), 1]
    assert s.d(0, 3) == 1
    assert len(metric.gen_interval_grid(1)) == 2
    s27 = metric.gen_interval_grid(27)
    assert len(s27) == 28
    assert s27.d(s27.lookup("13/27"), s27.lookup("14/27")) == F(1, 27)


def test_padic_distances():
    s = metric.gen_padic(3, 1)
    assert len(s) == 3 and s.d(0, 1) == 1
    s = metric.gen_padic(3, 2)
    assert s.d(0, 3) == F(1, 3) and s.d(0, 1) == 1
    with pytest.raises(ValueError):
        metric.gen_padic(4, 2)


def test_convergent_circle_cantor():
    s = metric.gen_convergent(2)
    assert sorted(s.coords) == [0, F(1, 2), 1]
    assert s.d(s.lookup("1/2"), s.lookup("1")) == F(1, 2)
    c = metric.gen_circle(4)
    assert c.d(0, 2) == F(1, 2)
    k = metric.gen_cantor(2, "ultrametric")
    assert len(k) == 4
    assert k.d(k.lookup("00"), k.lookup("20")) == F(1, 2)
    assert k.d(k.lookup("00"), k.lookup("02")) == F(1, 4)


def test_descriptor_rebuilds_sample():
    for s in [metric.gen_padic(2, 3), metric.gen_circle(5, "chord"), metric.gen_cantor(2)]:
        t = metric.sample_from_descriptor(s.descriptor)
        assert t.labels == s.labels
        assert all(t.d(i, j) == s.d(i, j) for i in s.points for j in s.points)


# --- nearest / hausdorff ---


def test_dist_to_set_examples():
    s = metric.line_sample([F(0), F(1, 5), F(1, 3), F(1, 2), F(2, 3), F(1)])
    ids = {lab: s.lookup(lab) for lab in ["0", "1/5", "1/3", "1/2", "2/3", "1"]}
    assert metric.dist_to_set(ids["1/3"], [ids["1/3"], ids["1"]], s) == (0, (ids["1/3"],))
    assert metric.dist_to_set(ids["1/2"], [ids["1/3"], ids["2/3"]], s) == (F(1, 6), (ids["1/3"], ids["2/3"]))
    grid = [ids[k] for k in ["0", "1/3", "2/3", "1"]]
    assert metric.dist_to_set(ids["1/5"], grid, s) == (F(2, 15), (ids["1/3"],))


def test_hausdorff_examples():
    s = metric.gen_interval_grid(27)
    assert metric.hausdorff_distance([0, 5], [0, 5], s) == 0
    assert metric.hausdorff_distance([0], [0, 27], s) == 1
    third, two_thirds, a, b = (s.lookup(k) for k in ["1/3", "2/3", "13/27", "14/27"])
    assert metric.hausdorff_distance([third, two_thirds], [a, b], s) == F(4, 27)
    assert metric.hausdorff_distance([third, two_thirds], [b], s) == F(5, 27)


# --- ingestion ---


def test_ingest_two_point_matrix():
    s = metric.ingest(b"2\n0,1\n1,0\n", "csv")
    assert len(s) == 2 and s.d(0, 1) == 1 and s.exact


def test_ingest_asymmetric_names_pair():
    with pytest.raises(MetricError) as exc:
        metric.ingest(b"2\n0,1\n2,0\n", "csv")
    v = exc.value.report.violations[0]
    assert v.kind == "symmetry" and v.witness == (0, 1)


def test_ingest_parse_error_location():
    with pytest.raises(ParseError) as exc:
        metric.ingest(b"2\n0,1\n1,zz\n", "csv")
    assert (exc.value.line, exc.value.column) == (3, 2)


def test_ingest_decimals_are_floats():
    s = metric.ingest(b"2\n0,0.5\n0.5,0\n", "csv")
    assert not s.exact and s.d(0, 1) == 0.5


def test_ingest_json_line_and_plane(tmp_path):
    s = metric.ingest(json.dumps({"kind": "line", "points": ["1/3", "1/2", "2"]}).encode())
    assert [s.d(0, j) for j in range(3)] == [0, F(1, 2) - F(1, 3), 2 - F(1, 3)]
    p = tmp_path / "pts.json"
    p.write_text(json.dumps({"kind": "plane", "points": [[0, 0], [3, 4], [1, 1]]}))
    s = metric.ingest(p)
    assert s.d(0, 1) == 5 and isinstance(s.d(0, 2), float)
    assert s.descriptor["generator"] == "file"
    assert metric.sample_from_descriptor(s.descriptor).labels == s.labels


def test_ingest_json_ultrametric_digits():
    s = metric.ingest(json.dumps({"points": ["00", "01", "10"], "metric": "ultrametric-digits"}).encode())
    assert s.d(0, 1) == F(1, 4) and s.d(0, 2) == F(1, 2)
    assert metric.is_ultrametric(s).is_ultrametric


def test_ingest_bad_json():
    with pytest.raises(ParseError):
        metric.ingest(b"{not json", "json")


# --- properties ---


@settings(max_examples=60, deadline=None)
@given(small_samples)
def test_generated_samples_are_metrics(s):
    assert metric.validate_metric(s).valid


@settings(max_examples=40, deadline=None)
@given(ultra_samples)
def test_ultra_generators_pass(s):
    assert metric.is_ultrametric(s).is_ultrametric


@settings(max_examples=80, deadline=None)
@given(small_samples, st.data())
def test_hausdorff_is_a_metric(s, data):
    subset = st.lists(st.sampled_from(list(s.points)), min_size=1, max_size=6, unique=True)
    A, B, C = (data.draw(subset) for _ in range(3))
    h = lambda X, Y: metric.hausdorff_distance(X, Y, s)
    assert ties(h(A, B), h(B, A)) or h(A, B) == h(B, A)
    assert h(A, C) <= h(A, B) + h(B, C) + 1e-9
    assert h(A, A) == 0


@settings(max_examples=80, deadline=None)
@given(small_samples, st.data())
def test_nearest_matches_scan(s, data):
    A = data.draw(st.lists(st.sampled_from(list(s.points)), min_size=1, unique=True))
    x = data.draw(st.sampled_from(list(s.points)))
    d, arg = metric.dist_to_set(x, A, s)
    best = min(s.d(x, a) for a in A)
    assert ties(d, best)
    assert set(arg) == {a for a in A if ties(s.d(x, a), best)}


def test_chord_matrix_is_exactly_symmetric():
    for m in range(3, 30):
        s = metric.gen_circle(m, "chord")
        assert all(s.d(i, j) == s.d(j, i) for i in s.points for j in s.points)
