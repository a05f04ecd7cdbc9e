import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kvvstream.matching import (BipartiteGraph, Matching, max_matching,
                                min_vertex_cover, validate_matching)


def brute_force_max(nl, edges):
    """Exponential augmenting enumeration; the oracle for small graphs."""
    adj = {}
    for a, b in edges:
        adj.setdefault(a, set()).add(b)
    best = 0

    def rec(u, used):
        nonlocal best
        if u == nl:
            best = max(best, len(used))
            return
        rec(u + 1, used)
        for b in adj.get(u, ()):
            if b not in used:
                used.add(b)
                rec(u + 1, used)
                used.discard(b)

    rec(0, set())
    return best


def random_graph(rng, max_side=8, max_edges=16):
    nl = int(rng.integers(1, max_side))
    nr = int(rng.integers(1, max_side))
    ne = int(rng.integers(0, max_edges))
    return BipartiteGraph.from_edges(rng.integers(0, nl, ne),
                                     rng.integers(0, nr, ne), nl, nr)


def test_single_edge():
    g = BipartiteGraph.from_edges([0], [0], 1, 1)
    assert max_matching(g).size == 1


def test_complete_k33():
    g = BipartiteGraph.from_edges([i for i in range(3) for _ in range(3)],
                                  list(range(3)) * 3, 3, 3)
    assert max_matching(g).size == 3


def test_empty_graph_cover():
    g = BipartiteGraph.from_edges([], [], 4, 4)
    m = max_matching(g)
    left, right = min_vertex_cover(g, m)
    assert m.size == 0 and not left.any() and not right.any()


def test_path_of_three_edges():
    # u0-v0, u1-v0, u1-v1: matching 2, cover 2
    g = BipartiteGraph.from_edges([0, 1, 1], [0, 0, 1], 2, 2)
    m = max_matching(g)
    left, right = min_vertex_cover(g, m)
    assert m.size == 2 and int(left.sum()) + int(right.sum()) == 2


def test_against_brute_force_battery():
    rng = np.random.default_rng(7)
    for _ in range(250):
        g = random_graph(rng)
        m = max_matching(g)
        bf = brute_force_max(g.n_left, list(zip(g.u.tolist(), g.v.tolist())))
        assert m.size == bf
        left, right = min_vertex_cover(g, m)
        assert int(left.sum()) + int(right.sum()) == m.size
        assert (left[g.u] | right[g.v]).all()


@given(st.integers(0, 2 ** 31 - 1))
@settings(max_examples=30)
def test_matching_vs_oracle_property(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, max_side=6, max_edges=10)
    m = max_matching(g)
    assert m.size == brute_force_max(
        g.n_left, list(zip(g.u.tolist(), g.v.tolist())))


def test_deterministic_under_edge_order():
    rng = np.random.default_rng(3)
    u = rng.integers(0, 40, 200)
    v = rng.integers(0, 40, 200)
    g1 = BipartiteGraph.from_edges(u, v, 40, 40)
    perm = rng.permutation(200)
    g2 = BipartiteGraph.from_edges(u[perm], v[perm], 40, 40)
    m1, m2 = max_matching(g1), max_matching(g2)
    assert (m1.pair_left == m2.pair_left).all()


def test_cover_rejects_non_maximum():
    g = BipartiteGraph.from_edges([0, 1], [0, 1], 2, 2)
    bogus = Matching(pair_left=np.array([-1, -1]), pair_right=np.array([-1, -1]))
    with pytest.raises(ValueError, match="not maximum"):
        min_vertex_cover(g, bogus)


def test_validate_matching_cases():
    g = BipartiteGraph.from_edges([0, 1, 1], [0, 0, 1], 2, 2)
    assert validate_matching(g, [0, 1], [0, 1]) == []
    assert any("twice" in m for m in validate_matching(g, [1, 1], [0, 1]))
    assert any("absent" in m for m in validate_matching(g, [0], [1]))


def test_duplicate_edge_detection():
    g = BipartiteGraph.from_edges([0, 0], [1, 1], 1, 2)
    assert g.has_duplicates()
    assert not BipartiteGraph.from_edges([0, 0], [0, 1], 1, 2).has_duplicates()


def test_endpoint_range_checked():
    with pytest.raises(ValueError, match="range"):
        BipartiteGraph.from_edges([5], [0], 2, 2)


def test_solver_ten_million_edges():
    """Capacity check: a 10^7-edge graph solves within the acceptance
    runtime envelope (numba path; the interpreted fallback is exempt)."""
    from kvvstream import _kernels as kn
    if not kn.HAVE_NUMBA:
        pytest.skip("capacity check needs the compiled kernels")
    import time
    rng = np.random.default_rng(0)
    n = 2_000_000
    e = 10_000_000
    g = BipartiteGraph.from_edges(rng.integers(0, n, e),
                                  rng.integers(0, n, e), n, n)
    t0 = time.perf_counter()
    m = max_matching(g)
    dt = time.perf_counter() - t0
    assert m.size > n // 2
    assert dt < 300, f"10M-edge solve took {dt:.0f}s"
    left, right = min_vertex_cover(g, m)
    assert int(left.sum()) + int(right.sum()) == m.size


def test_read_stream_text_round_trip(fix_a):
    import io

    from kvvstream.instance import export_stream_text
    from kvvstream.matching import read_stream_text

    fh = io.StringIO()
    export_stream_text(fix_a, fh)
    fh.seek(0)
    g = read_stream_text(fh)
    assert g.n_edges == fix_a.stream_edge_count()
    assert max_matching(g).size == 56  # the exact fix-a optimum


def test_read_stream_text_rejects_garbage():
    import io

    from kvvstream.matching import read_stream_text

    with pytest.raises(ValueError, match="p bipartite"):
        read_stream_text(io.StringIO("c not a stream\n"))
