import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from urnoverlap import InvalidInputError, ParseError, Sample
from urnoverlap.io import (
    CountTable,
    Envelope,
    curve_export,
    filter_min_depth,
    pairwise_matrices,
    parse_count_table,
    write_count_table,
)


def parse(text):
    return parse_count_table(io.StringIO(text))


def test_inline_table():
    t = parse("otu\ts1\ts2\nA\t1\t0\nB\t1\t3\n")
    assert t.sample_ids == ["s1", "s2"] and t.otu_ids == ["A", "B"]
    assert t.sample("s1") == Sample({0: 1, 1: 1})
    assert t.sample("s2") == Sample({1: 3})


def test_qiime_header_comments_and_crlf():
    text = "# Constructed from biom file\r\n#OTU ID\ts1\ts2\ttaxonomy\r\n\r\nA\t2\t0\tk__B\r\nB\t0\t5\tk__A\r\n"
    t = parse(text)
    assert t.sample_ids == ["s1", "s2"]
    assert t.id_label == "OTU ID"
    np.testing.assert_array_equal(t.counts, [[2, 0], [0, 5]])


def test_integral_float_counts_accepted():
    t = parse("otu\ts1\nA\t3.0\nB\t1e1\n")
    assert t.counts[:, 0].tolist() == [3, 10]


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("otu\ts1\ts2\nA\t1\n", 2, "expected 3 fields"),
        ("otu\ts1\nA\t1.5\n", 2, "'1.5'"),
        ("otu\ts1\nA\tx\n", 2, "'x'"),
        ("otu\ts1\nA\t1\nB\t-2\n", 3, "negative"),
        ("otu\ts1\ts1\nA\t1\t1\n", 1, "duplicate"),
        ("otu\ts1\ts2\nA\t1\t0\n", 1, "'s2'"),
    ],
)
def test_parse_errors_carry_line(text, line, fragment):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert err.value.line == line
    assert fragment in str(err.value)
    assert str(err.value).startswith(f"line {line}: ")


def test_no_header():
    with pytest.raises(ParseError):
        parse("# only comments\n\n")


def test_unknown_sample():
    with pytest.raises(InvalidInputError):
        parse("otu\ts1\nA\t1\n").sample("s9")


def table_from(counts, ids=None):
    counts = np.asarray(counts)
    ids = ids or [f"s{i}" for i in range(counts.shape[1])]
    return CountTable(ids, [f"o{r}" for r in range(counts.shape[0])], counts)


def test_min_depth_filter(caplog):
    t = table_from([[4999, 5000, 6000]])
    assert filter_min_depth(t, 5000).sample_ids == ["s1", "s2"]
    assert filter_min_depth(t, 5000, strict=True).sample_ids == ["s2"]
    assert filter_min_depth(t, 1).sample_ids == t.sample_ids
    empty = filter_min_depth(t, 10**6)
    assert empty.sample_ids == [] and "empty" in caplog.text


@given(arrays(np.int64, st.tuples(st.integers(1, 6), st.integers(1, 5)), elements=st.integers(0, 50)))
@settings(max_examples=50)
def test_round_trip(counts):
    counts[0] += 1  # keep every column nonempty
    t = table_from(counts)
    buf = io.StringIO()
    write_count_table(t, buf)
    back = parse(buf.getvalue())
    np.testing.assert_array_equal(back.counts, t.counts)
    assert back.sample_ids == t.sample_ids and back.otu_ids == t.otu_ids


def test_pairwise_disjoint():
    res = pairwise_matrices(table_from([[3, 0], [0, 4]]))
    np.testing.assert_array_equal(res["theta"].matrix, [[0, 1], [1, 0]])
    np.testing.assert_array_equal(res["stderr"].matrix, 0)
    np.testing.assert_array_equal(res["dderiv"].matrix, 0)


def test_pairwise_nested_and_fix_a():
    # columns: x = {1:2}, y = {1:5}; FIX-A x = {1:1, 2:1}, y = {1:2, 3:1}
    res = pairwise_matrices(table_from([[2, 5], [0, 0]] + [[0, 0]]))
    assert res["theta"].matrix[0, 1] == 0.0
    fa = pairwise_matrices(table_from([[1, 2], [1, 0], [0, 1]]))
    assert fa["theta"].matrix[0, 1] == pytest.approx(0.5, abs=1e-15)
    assert fa["dderiv"].matrix[0, 1] == pytest.approx(0, abs=1e-15)  # Q(1) = 0
    assert fa["stderr"].matrix[0, 1] == pytest.approx(0.5, abs=1e-15)


def test_pairwise_matches_direct_estimates(rng):
    from urnoverlap import estimate, summarize_pair, theta_hat_all

    counts = rng.poisson(1.5, size=(25, 6)) + (rng.random((25, 6)) < 0.05)
    counts[0] += 2
    t = table_from(counts)
    res = pairwise_matrices(t, workers=3, block=2)
    for a in range(6):
        for b in range(6):
            if a == b:
                continue
            series = estimate(t.sample(f"s{a}"), t.sample(f"s{b}"))
            assert res["theta"].matrix[a, b] == pytest.approx(series.theta[-1], abs=1e-12)
            assert res["stderr"].matrix[a, b] == pytest.approx(series.stderr[-1], abs=1e-12)
            assert res["dderiv"].matrix[a, b] == pytest.approx(series.theta[-2] - series.theta[-1], abs=1e-12)
    serial = pairwise_matrices(t)
    for m in res:
        np.testing.assert_array_equal(res[m].matrix, serial[m].matrix)


def test_pairwise_errors():
    with pytest.raises(InvalidInputError):
        pairwise_matrices(table_from([[3]]))
    with pytest.raises(InvalidInputError, match="'s1'"):
        pairwise_matrices(table_from([[3, 1]]))


def test_matrix_csv(rng):
    res = pairwise_matrices(table_from([[3, 0, 1], [1, 4, 1]], ids=["a", "b", "c"]))
    buf = io.StringIO()
    res["theta"].to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "x\\y,a,b,c"
    assert float(lines[1].split(",")[2]) == res["theta"].matrix[0, 1]


def test_curve_fix_a(fix_a):
    buf = io.StringIO()
    recs = curve_export(*fix_a, buf)
    assert [r["theta"] for r in recs] == pytest.approx([2 / 3, 1 / 2, 1 / 2], abs=1e-12)
    assert math.isnan(recs[0]["diff"]) and recs[1]["diff"] == pytest.approx(1 / 6)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "k,theta,var_x,var_y,stderr,diff"
    assert len(lines) == 4
    assert lines[1].split(",")[1] == "0.66666666666666663"


def test_curve_disjoint():
    recs = curve_export(Sample({1: 3}), Sample({2: 4}))
    assert len(recs) == 4
    assert all(r["theta"] == 1 and r["stderr"] == 0 for r in recs)


def test_envelope_json():
    buf = io.StringIO()
    Envelope("demo", {"a": np.arange(3), "b": np.float64(0.5), "c": np.int64(2)}, {"seed": 1}).dump(buf)
    payload = json.loads(buf.getvalue())
    assert payload["kind"] == "demo" and payload["version"]
    assert payload["data"] == {"a": [0, 1, 2], "b": 0.5, "c": 2}
