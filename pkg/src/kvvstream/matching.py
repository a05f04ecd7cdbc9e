"""Maximum bipartite matching (Hopcroft-Karp) and Koenig vertex covers.

Graphs are edge lists over dense [0, n_left) x [0, n_right) index ranges.
Adjacency is sorted before solving so results are reproducible regardless
of input edge order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import hk_match, konig_reach


@dataclass
class BipartiteGraph:
    n_left: int
    n_right: int
    u: np.ndarray
    v: np.ndarray

    @classmethod
    def from_edges(cls, u, v, n_left=None, n_right=None):
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        if len(u) != len(v):
            raise ValueError("edge endpoint arrays differ in length")
        if n_left is None:
            n_left = int(u.max()) + 1 if len(u) else 0
        if n_right is None:
            n_right = int(v.max()) + 1 if len(v) else 0
        if len(u) and (u.min() < 0 or u.max() >= n_left
                       or v.min() < 0 or v.max() >= n_right):
            raise ValueError("edge endpoint outside vertex range")
        return cls(n_left=n_left, n_right=n_right, u=u, v=v)

    @property
    def n_edges(self):
        return len(self.u)

    def csr(self):
        """Deduplicated adjacency, neighbors ascending per left vertex."""
        order = np.lexsort((self.v, self.u))
        u = self.u[order]
        v = self.v[order]
        if len(u):
            keep = np.ones(len(u), dtype=bool)
            keep[1:] = (u[1:] != u[:-1]) | (v[1:] != v[:-1])
            u, v = u[keep], v[keep]
        indptr = np.zeros(self.n_left + 1, dtype=np.int64)
        np.add.at(indptr, u + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, v

    def has_duplicates(self):
        if not len(self.u):
            return False
        key = self.u * np.int64(self.n_right) + self.v
        return len(np.unique(key)) != len(key)


@dataclass
class Matching:
    """pair_left[u] = matched right vertex or -1; pair_right mirrors it."""

    pair_left: np.ndarray
    pair_right: np.ndarray

    @property
    def size(self):
        return int((self.pair_left >= 0).sum())

    def edges(self):
        u = np.flatnonzero(self.pair_left >= 0)
        return u, self.pair_left[u]


def max_matching(g):
    """Maximum-cardinality matching, deterministic for a given edge set."""
    indptr, indices = g.csr()
    pair_u, pair_v = hk_match(indptr, indices, g.n_left, g.n_right)
    return Matching(pair_left=pair_u, pair_right=pair_v)


def min_vertex_cover(g, m):
    """Koenig cover from a maximum matching: (left_mask, right_mask).

    Cover = unreachable left vertices + reachable right vertices under
    alternating reachability from the free left vertices.  Raises if m is
    not maximum (an exposed augmenting path would break |cover| = |m|).
    """
    indptr, indices = g.csr()
    visit_u = np.zeros(g.n_left, dtype=np.bool_)
    visit_v = np.zeros(g.n_right, dtype=np.bool_)
    queue = np.empty(g.n_left, dtype=np.int64)
    konig_reach(indptr, indices, m.pair_left, m.pair_right, visit_u, visit_v,
                queue)
    left = ~visit_u
    right = visit_v
    if int(left.sum()) + int(right.sum()) != m.size:
        raise ValueError("matching is not maximum: Koenig size mismatch")
    if not _covers_all(g, left, right):
        raise ValueError("matching is not maximum: an edge escapes the cover")
    return left, right


def _covers_all(g, left, right):
    return bool((left[g.u] | right[g.v]).all())


def read_stream_text(fh):
    """Parse the exporter's edge-stream text format into a BipartiteGraph.

    Vertex ids are the exporter's packed ids, remapped densely per side
    (u-endpoints left, v-endpoints right, in first-seen order).
    """
    header = fh.readline().split()
    if header[:2] != ["p", "bipartite"]:
        raise ValueError("not an edge-stream file (missing 'p bipartite')")
    n_edges = int(header[4])
    left, right = {}, {}
    u_idx = np.empty(n_edges, dtype=np.int64)
    v_idx = np.empty(n_edges, dtype=np.int64)
    i = 0
    for line in fh:
        parts = line.split()
        if not parts or parts[0] != "e":
            continue
        a, b = int(parts[1]), int(parts[2])
        u_idx[i] = left.setdefault(a, len(left))
        v_idx[i] = right.setdefault(b, len(right))
        i += 1
    if i != n_edges:
        raise ValueError(f"edge count mismatch: header {n_edges}, found {i}")
    return BipartiteGraph.from_edges(u_idx, v_idx, len(left), len(right))


def validate_matching(g, u, v):
    """Check a matching given as endpoint arrays; violations returned as
    strings (empty list = ok)."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    out = []
    if len(u) != len(v):
        return ["endpoint arrays differ in length"]
    if len(u) == 0:
        return out
    if len(np.unique(u)) != len(u):
        out.append("a left vertex is matched twice")
    if len(np.unique(v)) != len(v):
        out.append("a right vertex is matched twice")
    key = u * np.int64(g.n_right) + v
    gkey = g.u * np.int64(g.n_right) + g.v
    missing = ~np.isin(key, gkey)
    if missing.any():
        out.append(f"{int(missing.sum())} matching edges absent from the graph")
    return out
