import io

import numpy as np
import pytest

import graphsketch as gs
from graphsketch.graph import EdgeListParseError, read_id_map, write_id_map


def test_triangle_load():
    g, ids = gs.load_edgelist(iter(["0 1", "1 2", "2 0"]), undirected=True)
    assert g.n == 3
    assert g.m == 3
    assert g.degrees.tolist() == [2, 2, 2]
    assert ids.tolist() == [0, 1, 2]


def test_duplicate_edges_collapse():
    g, _ = gs.load_edgelist(iter(["0 1", "0 1"]), undirected=True)
    assert g.m == 1
    assert g.degrees.tolist() == [1, 1]


def test_comments_and_blank_lines_skipped():
    g, _ = gs.load_edgelist(iter(["# header", "", "0 1"]), undirected=True)
    assert g.m == 1


def test_noncontiguous_ids_remapped_first_seen():
    g, ids = gs.load_edgelist(iter(["10 30", "30 20"]), undirected=True)
    assert g.n == 3
    assert ids.tolist() == [10, 30, 20]


def test_self_loop_kept_single_arc():
    g, _ = gs.load_edgelist(iter(["0 0", "0 1"]), undirected=True)
    assert g.m == 2
    assert g.degrees[0] == 2  # loop arc + edge arc
    assert g.degrees[1] == 1


def test_directed_mode():
    g, _ = gs.load_edgelist(iter(["0 1", "1 2"]), undirected=False)
    assert g.degrees.tolist() == [1, 1, 0]
    assert g.m == 2


def test_malformed_line_reports_number():
    with pytest.raises(EdgeListParseError, match="line 2"):
        gs.load_edgelist(iter(["0 1", "0 x"]), undirected=True)
    with pytest.raises(EdgeListParseError, match="line 1"):
        gs.load_edgelist(iter(["0 1 2"]), undirected=True)


def test_empty_input_rejected():
    with pytest.raises(ValueError):
        gs.load_edgelist(iter([]), undirected=True)
    with pytest.raises(ValueError):
        gs.load_edgelist(iter(["# only comments"]), undirected=True)


def test_transition_row_triangle(triangle):
    assert gs.transition_row(triangle, 0) == {1: 0.5, 2: 0.5}


def test_transition_row_isolated_is_empty():
    g, _ = gs.load_edgelist(iter(["0 1"]), undirected=False)
    assert gs.transition_row(g, 1) == {}


def test_transition_row_star_center():
    g, _ = gs.load_edgelist(iter(["0 1", "0 2", "0 3", "0 4"]), undirected=True)
    assert gs.transition_row(g, 0) == {1: 0.25, 2: 0.25, 3: 0.25, 4: 0.25}


def test_transition_row_out_of_range(triangle):
    with pytest.raises(ValueError):
        gs.transition_row(triangle, 3)


def test_transition_rows_sum_to_one():
    rng = np.random.default_rng(0)
    pairs = rng.integers(0, 60, size=(300, 2))
    lines = [f"{u} {v}" for u, v in pairs if u != v]
    g, _ = gs.load_edgelist(iter(lines), undirected=True)
    for v in range(g.n):
        row = gs.transition_row(g, v)
        if row:
            assert abs(sum(row.values()) - 1.0) < 1e-12


def test_serialize_roundtrip():
    rng = np.random.default_rng(1)
    pairs = rng.integers(0, 40, size=(150, 2))
    lines = [f"{u + 3} {v + 3}" for u, v in pairs if u != v]
    g, ids = gs.load_edgelist(iter(lines), undirected=True)
    buf = io.StringIO()
    gs.write_edgelist(g, ids, buf, undirected=True)
    g2, ids2 = gs.load_edgelist(io.StringIO(buf.getvalue()), undirected=True)
    assert g.n == g2.n and g.m == g2.m
    assert np.array_equal(g.offsets, g2.offsets)
    assert np.array_equal(g.targets, g2.targets)
    assert np.array_equal(ids, ids2)


def test_id_map_roundtrip():
    ids = np.array([10, 30, 20])
    buf = io.StringIO()
    write_id_map(ids, buf)
    assert np.array_equal(read_id_map(io.StringIO(buf.getvalue())), ids)


def test_transition_matrix_rows_stochastic(triangle):
    p = triangle.transition_matrix()
    np.testing.assert_allclose(np.asarray(p.sum(axis=1)).ravel(), 1.0)
