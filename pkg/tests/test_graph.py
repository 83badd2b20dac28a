import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings

from conftest import path, simple_graphs, star
from dynim.graph import (
    GraphInputError,
    TemporalGraph,
    avg_neighbor_degree,
    build_snapshot,
    degree,
    ingest_temporal_edgelist,
    read_snapshot_dir,
    scc_count,
    snapshot_stats,
    undirected_projection,
    write_snapshot_dir,
)


def test_build_dedups_arcs():
    s = build_snapshot([(0, 1), (1, 0), (0, 1)], 2, directed=True)
    assert sorted(s.edge_list()) == [(0, 1), (1, 0)]
    assert s.num_edges == 2


def test_build_drops_self_loop():
    s = build_snapshot([(0, 0)], 1, directed=True)
    assert s.num_arcs == 0


def test_build_undirected_is_symmetric():
    s = build_snapshot([(0, 1), (1, 2)], 3, directed=False)
    A = s.adjacency_matrix().toarray()
    assert (A == A.T).all()
    assert degree(s, 1) == 2
    assert s.num_edges == 2


def test_build_rejects_out_of_range_endpoint():
    with pytest.raises(GraphInputError, match="edge 1"):
        build_snapshot([(0, 1), (0, 5)], 3, directed=True)


def test_snapshot_arrays_are_read_only():
    s = star()
    with pytest.raises(ValueError):
        s.indices[0] = 3


def test_ingest_interior_empty_bin():
    tg = ingest_temporal_edgelist(["a b 0", "b c 100"], bin_width=50)
    assert tg.T == 3
    a, b, c = (tg.labels.index(x) for x in "abc")
    assert tg[0].edge_list() == [(a, b)]
    assert tg[1].num_arcs == 0
    assert tg[2].edge_list() == [(b, c)]


def test_ingest_same_bin_collapses_duplicates():
    tg = ingest_temporal_edgelist(["a b 0", "a b 10"], bin_width=100)
    assert tg.T == 1
    assert tg[0].num_edges == 1


def test_ingest_single_line():
    tg = ingest_temporal_edgelist(["x y 0"], bin_width=1)
    assert (tg.T, tg.num_nodes) == (1, 2)


def test_ingest_skips_comments_and_reports_line_numbers():
    tg = ingest_temporal_edgelist(["# header", "a b 5", "", "b c 6"], bin_width=10)
    assert tg.T == 1 and tg[0].num_edges == 2
    with pytest.raises(GraphInputError, match="line 2"):
        ingest_temporal_edgelist(["a b 1", "a b"], bin_width=1)
    with pytest.raises(GraphInputError, match="line 1"):
        ingest_temporal_edgelist(["a b x"], bin_width=1)
    with pytest.raises(GraphInputError):
        ingest_temporal_edgelist(["# only a comment"], bin_width=1)


def test_ingest_origin_is_min_timestamp():
    tg = ingest_temporal_edgelist(["a b 1000", "b c 1009", "c d 1010"], bin_width=10)
    assert tg.T == 2
    assert tg.bin_spec["origin"] == 1000


def test_projection_examples():
    p = undirected_projection(build_snapshot([(0, 1)], 2, True))
    assert not p.directed and p.edge_list() == [(0, 1)]
    p = undirected_projection(build_snapshot([(0, 1), (1, 0)], 2, True))
    assert p.num_edges == 1
    u = star()
    assert undirected_projection(u) is u


def test_star_degrees():
    s = star()
    assert degree(s, 0) == 3 and avg_neighbor_degree(s, 0) == 1.0
    assert degree(s, 2) == 1 and avg_neighbor_degree(s, 2) == 3.0


def test_isolated_node_degree():
    s = build_snapshot([(0, 1)], 3, False, present=[2])
    assert degree(s, 2) == 0 and avg_neighbor_degree(s, 2) == 0.0


def test_stats_directed_cycle_and_path():
    cyc = build_snapshot([(0, 1), (1, 2), (2, 0)], 3, True)
    st = snapshot_stats(cyc)
    assert (st.scc_count, st.wcc_count) == (1, 1)
    st = snapshot_stats(path(3, directed=True))
    assert (st.scc_count, st.wcc_count) == (3, 1)


def test_stats_edgeless_with_present_nodes():
    s = build_snapshot([], 5, True, present=range(5))
    st = snapshot_stats(s)
    assert st.scc_count == 5 and st.edges == 0 and st.nodes_present == 5


@settings(max_examples=60, deadline=None)
@given(simple_graphs(directed=True))
def test_scc_matches_networkx_and_bounds(s):
    G = nx.DiGraph()
    G.add_nodes_from(s.present_nodes().tolist())
    G.add_edges_from(s.edge_list())
    st = snapshot_stats(s)
    assert st.scc_count == nx.number_strongly_connected_components(G)
    assert st.wcc_count == nx.number_weakly_connected_components(G)
    assert st.wcc_count <= st.scc_count <= st.nodes_present


@settings(max_examples=60, deadline=None)
@given(simple_graphs(directed=True))
def test_projection_scc_equals_wcc(s):
    u = undirected_projection(s)
    assert scc_count(u) == snapshot_stats(u).wcc_count == snapshot_stats(s).wcc_count


@settings(max_examples=60, deadline=None)
@given(simple_graphs(directed=True))
def test_projection_idempotent(s):
    once = undirected_projection(s)
    assert undirected_projection(once).same_structure(once)


@settings(max_examples=60, deadline=None)
@given(simple_graphs())
def test_handshake(s):
    assert sum(degree(s, v) for v in range(s.num_nodes)) == 2 * s.num_edges


def test_snapshot_dir_roundtrip(tmp_path):
    snaps = (
        build_snapshot([(0, 1), (2, 3)], 5, True),
        build_snapshot([], 5, True),
        build_snapshot([(4, 0)], 5, True, present=[2]),
    )
    tg = TemporalGraph(snaps, tuple("abcde"), {"kind": "test"})
    write_snapshot_dir(tg, tmp_path / "d")
    back = read_snapshot_dir(tmp_path / "d")
    assert back.labels == tg.labels and back.bin_spec == tg.bin_spec
    for a, b in zip(tg.snapshots, back.snapshots):
        assert a.same_structure(b)


def test_read_snapshot_dir_missing(tmp_path):
    with pytest.raises(GraphInputError):
        read_snapshot_dir(tmp_path)


def test_temporal_graph_requires_shared_universe():
    with pytest.raises(GraphInputError):
        TemporalGraph((build_snapshot([], 2, True), build_snapshot([], 3, True)), ("a", "b"))
    with pytest.raises(GraphInputError):
        TemporalGraph((), ())


def test_present_mask_tracks_incident_edges():
    s = build_snapshot([(0, 1)], 4, False)
    assert s.present.tolist() == [True, True, False, False]
    assert np.array_equal(s.present_nodes(), [0, 1])
