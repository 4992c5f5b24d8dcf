import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from marketstates.cluster import ClusterConfig, build_tree, cut_to_states
from marketstates.errors import ParseError
from marketstates.io import (
    read_correlation_csv,
    read_histogram_csv,
    read_matrix_csv,
    read_timeline_csv,
    tree_from_dict,
    tree_to_dict,
    write_histogram_csv,
    write_matrix_csv,
    write_timeline_csv,
)
from marketstates.cluster import StateSequence
from marketstates.states import coefficient_histogram

from conftest import dates, random_correlation, uniform_window


def test_one_by_one_round_trip(tmp_path):
    write_matrix_csv([[1.0]], tmp_path / "m.csv", ["A"])
    values, rows, cols = read_matrix_csv(tmp_path / "m.csv")
    assert values.tolist() == [[1.0]]
    assert rows == cols == ["A"]


def test_random_symmetric_round_trip_bit_exact(tmp_path, rng):
    c = random_correlation(rng, 5)
    write_matrix_csv(c, tmp_path / "c.csv")
    back = read_correlation_csv(tmp_path / "c.csv")
    assert np.array_equal(back.values, c.values)
    assert back.symbols == c.symbols


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)).map(lambda s: (s[0], s[0])),
              elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_matrix_round_trip_property(tmp_path_factory, m):
    p = tmp_path_factory.mktemp("m") / "m.csv"
    write_matrix_csv(m, p)
    values, _, _ = read_matrix_csv(p)
    assert np.array_equal(values, m)


def test_ragged_row_reports_row_number(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text(",A,B\nA,1.0,0.5\nB,0.5\n")
    with pytest.raises(ParseError) as info:
        read_matrix_csv(p)
    assert info.value.line == 3


def test_seventeen_digits(tmp_path):
    write_matrix_csv([[0.1 + 0.2]], tmp_path / "m.csv", ["A"])
    assert "0.30000000000000004" in (tmp_path / "m.csv").read_text()


def test_histogram_csv(tmp_path):
    h = coefficient_histogram(uniform_window(5, 0.3), bins=8)
    write_histogram_csv(h, tmp_path / "h.csv")
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines[0] == "bin_left,bin_right,count"
    back = read_histogram_csv(tmp_path / "h.csv")
    assert np.array_equal(back.counts, h.counts)
    assert np.array_equal(back.bin_edges, h.bin_edges)


def test_timeline_csv(tmp_path):
    seq = StateSequence(tuple(zip(dates(3), [1, 2, 1])))
    write_timeline_csv(seq, tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text().splitlines()[1] == "2020-01-01,1"
    assert read_timeline_csv(tmp_path / "t.csv") == seq


def test_tree_json_round_trip(tmp_path, rng):
    ws = [random_correlation(rng, 4) for _ in range(5)]
    root = build_tree(ws, ClusterConfig(0.0))
    cut_to_states(root, 0.05)
    data = tree_to_dict(root, dates(5))
    text = json.dumps(data)
    back = tree_from_dict(json.loads(text))
    assert tree_to_dict(back) == data
    assert set(data) >= {"members", "branch_length", "mean_center_distance", "children"}
    assert data["members"] == [d.date().isoformat() for d in dates(5)]
    assert len(back.leaves()) == 5
