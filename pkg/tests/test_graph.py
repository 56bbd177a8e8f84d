import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hamlab.graph import (
    Graph,
    VertexSet,
    complete_graph,
    cycle_graph,
    external_neighborhood,
    from_edges,
    is_connected,
    min_degree,
    path_graph,
    petersen_graph,
    star_graph,
    union,
)


def test_petersen_is_cubic():
    g = petersen_graph()
    assert g.n == 10 and g.edge_count() == 15
    assert np.all(g.degrees() == 3)
    g.check_invariants()


def test_add_edge_validates_and_is_idempotent():
    g = Graph(4)
    g.add_edge(0, 1).add_edge(1, 0)
    assert g.edge_count() == 1
    with pytest.raises(ValueError):
        g.add_edge(2, 2)
    with pytest.raises(ValueError):
        g.add_edge(0, 4)


def test_graph_needs_a_vertex():
    with pytest.raises(ValueError):
        Graph(0)


def test_external_neighborhood_of_path_end():
    g = path_graph(5)
    assert external_neighborhood(g, {0}) == {1}
    assert external_neighborhood(g, {1, 2}) == {0, 3}
    assert len(external_neighborhood(g, set(range(5)))) == 0


def test_components_and_connectivity():
    g = from_edges(6, [(0, 1), (1, 2), (3, 4)])
    comps = [sorted(c.tolist()) for c in g.components()]
    assert comps == [[0, 1, 2], [3, 4], [5]]
    assert not is_connected(g)
    assert is_connected(cycle_graph(7))
    assert is_connected(Graph(1))


def test_union_rejects_mismatched_sizes():
    with pytest.raises(ValueError):
        union(Graph(3), Graph(4))
    u = union(path_graph(4), from_edges(4, [(0, 3)]))
    assert u.edge_count() == 4 and u.has_edge(0, 3)


def test_named_graphs():
    assert min_degree(complete_graph(6)) == 5
    assert star_graph(3).degrees().tolist() == [3, 1, 1, 1]
    assert cycle_graph(5).edges().tolist() == [[0, 1], [0, 4], [1, 2], [2, 3], [3, 4]]


def test_rows_past_word_boundary():
    n = 130
    g = from_edges(n, [(0, 129), (63, 64), (64, 127)])
    assert g.has_edge(129, 0) and g.has_edge(64, 63)
    assert sorted(g.neighbors(64).tolist()) == [63, 127]
    g.check_invariants()


def test_vertex_set_algebra():
    a = VertexSet.from_iter(100, [1, 5, 70])
    b = VertexSet.from_iter(100, [5, 99])
    assert sorted(a | b) == [1, 5, 70, 99]
    assert list(a & b) == [5]
    assert sorted(a - b) == [1, 70]
    assert 70 in a and 71 not in a
    assert len(VertexSet.full(100)) == 100


edge_lists = st.integers(2, 40).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1]),
                 max_size=80),
    )
)


@settings(max_examples=60, deadline=None)
@given(edge_lists)
def test_bulk_and_single_insertion_agree(data):
    n, edges = data
    one = Graph(n)
    for u, v in edges:
        one.add_edge(u, v)
    bulk = Graph(n).add_edges(np.array(edges, dtype=np.int64).reshape(-1, 2))
    assert np.array_equal(one.rows, bulk.rows)
    assert one.edge_count() == bulk.edge_count() == len({tuple(sorted(e)) for e in edges})
    bulk.check_invariants()


@settings(max_examples=60, deadline=None)
@given(edge_lists, st.data())
def test_external_neighborhood_matches_definition(data, draw):
    n, edges = data
    g = Graph(n).add_edges(np.array(edges, dtype=np.int64).reshape(-1, 2))
    X = set(draw.draw(st.lists(st.integers(0, n - 1), max_size=n)))
    expect = {u for x in X for u in g.neighbors(x).tolist()} - X
    assert set(external_neighborhood(g, X)) == expect
