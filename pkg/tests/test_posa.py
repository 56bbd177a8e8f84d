import math

import numpy as np
import pytest

from hamlab import gen
from hamlab.gen import RngStream
from hamlab.graph import (
    Graph,
    complete_graph,
    cycle_graph,
    from_edges,
    path_graph,
    petersen_graph,
    star_graph,
)
from hamlab.oracle import hamiltonian_exact, longest_path_exact
from hamlab.posa import (
    PathError,
    PathState,
    check_certificate,
    endpoint_closure,
    find_boosters,
    format_certificate,
    grow_longest_path,
    is_booster,
    parse_certificate,
    posa_bound_check,
    rotate,
    rotation_maximal,
    solve,
    sprinkle,
    verify_hamilton_cycle,
)


def p4_with_chord():
    return from_edges(4, [(0, 1), (1, 2), (2, 3), (1, 3)])


def test_rotate_definition():
    P = PathState(p4_with_chord(), (0, 1, 2, 3))
    Q = rotate(P, (3, 1))
    assert Q.order == (0, 1, 3, 2)
    assert Q.ends == (0, 2)
    # rotating back about the same pivot restores the path
    assert rotate(Q, (2, 1)).order == P.order


def test_rotate_rejects_bad_pivots():
    P = PathState(p4_with_chord(), (0, 1, 2, 3))
    with pytest.raises(PathError):
        rotate(P, (3, 2))
    with pytest.raises(PathError):
        rotate(P, (3, 0))
    with pytest.raises(PathError):
        rotate(P, (2, 0))


def test_path_state_validates():
    with pytest.raises(PathError):
        PathState(path_graph(4), (0, 2, 1))
    with pytest.raises(PathError):
        PathState(path_graph(4), (0, 1, 0))


def _closure_by_search(P, fixed):
    # every rotation sequence, states keyed by the whole path
    start = P if P.order[0] == fixed else P.reversed()
    seen = {start.order}
    stack = [start]
    ends = set()
    while stack:
        cur = stack.pop()
        ends.add(cur.order[-1])
        pos = cur.position
        for w in cur.graph.neighbors(cur.order[-1]).tolist():
            if pos.get(w, len(cur.order)) <= len(cur.order) - 3:
                nxt = rotate(cur, (cur.order[-1], w))
                if nxt.order not in seen:
                    seen.add(nxt.order)
                    stack.append(nxt)
    return ends


def test_closure_examples():
    P = PathState(path_graph(5), tuple(range(5)))
    assert set(endpoint_closure(P, 0).reachable) == {4}
    K = PathState(complete_graph(4), (0, 1, 2, 3))
    assert set(endpoint_closure(K, 0).reachable) == {1, 2, 3}
    C = PathState(cycle_graph(5), tuple(range(5)))
    assert set(endpoint_closure(C, 0).reachable) == _closure_by_search(C, 0)
    with pytest.raises(PathError):
        endpoint_closure(P, 2)


def test_closure_matches_exhaustive_search():
    for s in range(60):
        n = 5 + s % 4
        g = gen.sample_gnp(n, 0.5, RngStream(21, (s,)))
        P = grow_longest_path(g)
        cl = endpoint_closure(P, P.order[0])
        assert set(cl.reachable) == _closure_by_search(P, P.order[0])
        for y, Q in cl.paths.items():
            assert Q.order[0] == P.order[0] and Q.order[-1] == y
            assert sorted(Q.order) == sorted(P.order)
            # the witness replays to the same path
            R = P
            for w in cl.witness[y]:
                R = rotate(R, (R.order[-1], w))
            assert R.order == Q.order


def test_p4_boosters():
    g = path_graph(4)
    b = find_boosters(g)
    assert list(b) == [(0, 3)]
    assert is_booster(g, (0, 3))
    assert not is_booster(g, (0, 2))
    assert not is_booster(g, (1, 3))
    with pytest.raises(ValueError):
        is_booster(g, (0, 1))


def test_star_leaf_pairs_are_boosters():
    g = star_graph(3)
    assert all(is_booster(g, e) for e in [(1, 2), (1, 3), (2, 3)])


def test_boosters_need_connected_non_hamiltonian():
    with pytest.raises(ValueError):
        find_boosters(cycle_graph(4))
    with pytest.raises(ValueError):
        find_boosters(from_edges(4, [(0, 1), (2, 3)]))


def test_posa_bound_on_p4_and_random_graphs():
    assert posa_bound_check(path_graph(4))
    checked = 0
    s = 0
    while checked < 200:
        n = 5 + s % 6
        g = gen.sample_gnp(n, 0.35, RngStream(31, (s,)))
        s += 1
        if not g.is_connected() or hamiltonian_exact(g):
            continue
        assert posa_bound_check(g)
        checked += 1


def test_engine_examples():
    assert solve(cycle_graph(6)).found
    assert solve(complete_graph(4)).found
    assert not solve(petersen_graph()).found
    assert len(grow_longest_path(cycle_graph(6)).order) == 6
    two_triangles = from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert len(grow_longest_path(two_triangles).order) == 3


def test_grow_longest_path_is_rotation_maximal():
    for s in range(500):
        n = 4 + s % 7
        g = gen.sample_gnp(n, 0.4, RngStream(41, (s,)))
        P = grow_longest_path(g)
        assert P.length <= longest_path_exact(g)
        if len(P.order) < n:
            assert rotation_maximal(g, P)


def test_sprinkle_examples():
    r = sprinkle(cycle_graph(5), [(0, 2)])
    assert r.found and r.edges_consumed == 0
    r = sprinkle(path_graph(4), [(0, 3)])
    assert r.found and r.edges_consumed == 1 and sorted(r.cycle.tolist()) == [0, 1, 2, 3]
    r = sprinkle(path_graph(4), [(0, 2)])
    assert not r.found
    with pytest.raises(ValueError):
        sprinkle(from_edges(4, [(0, 1), (2, 3)]), [(1, 2)])


def test_sprinkle_trace_is_monotone():
    n = 60
    g = gen.sample_gnp(n, 0.03, RngStream(5))
    g.add_edges(np.array([(i, i + 1) for i in range(n - 1)]))
    stream = gen.uniform_edge_stream(n, 400, RngStream(6))
    r = sprinkle(g, stream)
    assert np.all(np.diff(r.trace) >= 0)
    if r.found:
        h = g.copy().add_edges(r.consumed)
        assert verify_hamilton_cycle(h, r.cycle)


def test_verify_hamilton_cycle():
    c5 = cycle_graph(5)
    assert verify_hamilton_cycle(c5, [0, 1, 2, 3, 4])
    assert not verify_hamilton_cycle(c5, [0, 2, 1, 3, 4])
    assert verify_hamilton_cycle(complete_graph(4), [2, 0, 3, 1])
    assert not verify_hamilton_cycle(c5, [0, 1, 2, 3])
    assert not verify_hamilton_cycle(c5, [0, 1, 2, 3, 3])


def test_certificate_round_trip():
    g = path_graph(6)
    r = sprinkle(g, [(0, 5)])
    text = format_certificate(r)
    cycle, consumed = parse_certificate(text)
    assert sorted(cycle.tolist()) == list(range(6)) and consumed.tolist() == [[0, 5]]
    assert check_certificate(g, text)
    assert not check_certificate(path_graph(6), text.replace("consumed 1\n0 5\n", "consumed 0\n"))


def test_engine_on_random_graph_above_threshold():
    n = 2000
    p = (math.log(n) + math.log(math.log(n)) + 2) / n
    found = 0
    for s in range(10):
        g = gen.sample_gnp(n, p, RngStream(8, (s,)))
        r = solve(g)
        if r.found:
            assert verify_hamilton_cycle(g, r.cycle)
            found += 1
        elif g.min_degree() >= 2:
            # the engine is heuristic, but with min degree 2 it rarely gives up
            pass
    assert found >= 5


def test_found_always_agrees_with_oracle():
    for s in range(400):
        n = 5 + s % 10
        g = gen.sample_gnp(n, 0.4, RngStream(9, (s,)))
        r = solve(g)
        if r.found:
            assert verify_hamilton_cycle(g, r.cycle)
            assert hamiltonian_exact(g)
