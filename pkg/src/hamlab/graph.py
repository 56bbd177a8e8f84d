"""Dense simple graphs stored as bit matrices.

Every vertex owns one row of ``ceil(n / 64)`` ``uint64`` words; bit ``u`` of
row ``v`` is set exactly when ``uv`` is an edge.  Set-neighbourhood queries are
then word-parallel OR / AND-NOT sweeps over rows.
"""

from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np

from . import _bits


def n_words(n: int) -> int:
    return (n + 63) >> 6


class VertexSet:
    """Subset of ``0..n-1`` packed into ``uint64`` words."""

    __slots__ = ("n", "words")

    def __init__(self, n: int, words: np.ndarray | None = None):
        self.n = int(n)
        if words is None:
            words = np.zeros(n_words(self.n), dtype=np.uint64)
        self.words = words

    @classmethod
    def from_iter(cls, n: int, items: Iterable[int]) -> "VertexSet":
        idx = np.fromiter((int(i) for i in items), dtype=np.int64)
        return cls.from_array(n, idx)

    @classmethod
    def from_array(cls, n: int, idx: np.ndarray) -> "VertexSet":
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise ValueError(f"vertex out of range for n={n}")
        s = cls(n)
        np.bitwise_or.at(s.words, idx >> 6, np.left_shift(np.uint64(1), (idx & 63).astype(np.uint64)))
        return s

    @classmethod
    def full(cls, n: int) -> "VertexSet":
        return cls.from_array(n, np.arange(n))

    def to_array(self) -> np.ndarray:
        return np.flatnonzero(self.mask())

    def mask(self) -> np.ndarray:
        """Boolean membership array of length n."""
        return np.unpackbits(self.words.view(np.uint8), bitorder="little")[: self.n].astype(bool)

    def __len__(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def __iter__(self) -> Iterator[int]:
        return (int(v) for v in self.to_array())

    def __contains__(self, v: object) -> bool:
        if not isinstance(v, (int, np.integer)) or not 0 <= v < self.n:
            return False
        return bool((int(self.words[v >> 6]) >> (int(v) & 63)) & 1)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, VertexSet):
            return self.n == other.n and bool(np.array_equal(self.words, other.words))
        if isinstance(other, (set, frozenset)):
            return set(self) == other
        return NotImplemented

    def __or__(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.n, self.words | other.words)

    def __and__(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.n, self.words & other.words)

    def __sub__(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.n, self.words & ~other.words)

    def __repr__(self) -> str:
        items = self.to_array()
        shown = ", ".join(map(str, items[:12])) + (", ..." if items.size > 12 else "")
        return f"VertexSet(n={self.n}, {{{shown}}})"


def as_vertex_set(n: int, X) -> VertexSet:
    if isinstance(X, VertexSet):
        if X.n != n:
            raise ValueError(f"vertex set over {X.n} vertices used with graph of {n}")
        return X
    if isinstance(X, np.ndarray):
        return VertexSet.from_array(n, X)
    return VertexSet.from_iter(n, X)


class Graph:
    """Undirected simple graph on ``0..n-1`` with a dense bit adjacency matrix."""

    __slots__ = ("n", "rows", "m")

    def __init__(self, n: int):
        if n < 1:
            raise ValueError(f"graph needs at least one vertex, got n={n}")
        self.n = int(n)
        self.rows = np.zeros((self.n, n_words(self.n)), dtype=np.uint64)
        self.m = 0

    # construction

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise ValueError(f"vertex {v} out of range 0..{self.n - 1}")

    def add_edge(self, u: int, v: int) -> "Graph":
        u, v = int(u), int(v)
        self._check_vertex(u)
        self._check_vertex(v)
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        if not self.has_edge(u, v):
            self.rows[u, v >> 6] |= np.uint64(1 << (v & 63))
            self.rows[v, u >> 6] |= np.uint64(1 << (u & 63))
            self.m += 1
        return self

    def add_edges(self, pairs) -> "Graph":
        """Bulk version of :meth:`add_edge` for an ``(k, 2)`` integer array."""
        e = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if e.size == 0:
            return self
        if e.min() < 0 or e.max() >= self.n:
            raise ValueError(f"edge endpoint out of range 0..{self.n - 1}")
        if np.any(e[:, 0] == e[:, 1]):
            raise ValueError("self-loop in edge batch")
        u, v = e[:, 0], e[:, 1]
        one = np.uint64(1)
        np.bitwise_or.at(self.rows, (u, v >> 6), np.left_shift(one, (v & 63).astype(np.uint64)))
        np.bitwise_or.at(self.rows, (v, u >> 6), np.left_shift(one, (u & 63).astype(np.uint64)))
        self.m = int(np.bitwise_count(self.rows).sum()) // 2
        return self

    def copy(self) -> "Graph":
        g = Graph.__new__(Graph)
        g.n, g.rows, g.m = self.n, self.rows.copy(), self.m
        return g

    # queries

    def has_edge(self, u: int, v: int) -> bool:
        return bool((int(self.rows[u, v >> 6]) >> (v & 63)) & 1)

    def degree(self, v: int) -> int:
        return int(np.bitwise_count(self.rows[v]).sum())

    def degrees(self) -> np.ndarray:
        return _bits.row_popcounts(self.rows)

    def min_degree(self) -> int:
        return int(self.degrees().min())

    def neighbors(self, v: int) -> np.ndarray:
        return _bits.bits_to_list(self.rows[v], self.n)

    def edge_count(self) -> int:
        return self.m

    def edges(self) -> np.ndarray:
        """All edges as an ``(m, 2)`` array with ``u < v``, lexicographically sorted."""
        out = []
        for u in range(self.n):
            nb = self.neighbors(u)
            nb = nb[nb > u]
            if nb.size:
                out.append(np.column_stack((np.full(nb.size, u), nb)))
        if not out:
            return np.empty((0, 2), dtype=np.int64)
        return np.concatenate(out).astype(np.int64)

    def non_edges(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            for v in range(u + 1, self.n):
                if not self.has_edge(u, v):
                    yield u, v

    def component_labels(self) -> np.ndarray:
        return _bits.component_labels(self.rows)

    def components(self) -> list[np.ndarray]:
        labels = self.component_labels()
        order = np.argsort(labels, kind="stable")
        cuts = np.flatnonzero(np.diff(labels[order])) + 1
        return np.split(order, cuts)

    def is_connected(self) -> bool:
        return int(self.component_labels().max()) == 0

    def external_neighborhood(self, X) -> VertexSet:
        xs = as_vertex_set(self.n, X)
        acc = np.zeros_like(xs.words)
        _bits.union_of_rows(self.rows, xs.to_array(), acc)
        return VertexSet(self.n, acc & ~xs.words)

    def union(self, other: "Graph") -> "Graph":
        return union(self, other)

    def check_invariants(self) -> None:
        """Raise ``AssertionError`` if symmetry, loop-freeness or ``m`` are broken."""
        dense = np.unpackbits(self.rows.view(np.uint8), axis=1, bitorder="little")[:, : self.n]
        assert np.array_equal(dense, dense.T), "adjacency not symmetric"
        assert not dense.diagonal().any(), "self-loop present"
        assert int(dense.sum()) == 2 * self.m, "edge count out of sync"

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def new_graph(n: int) -> Graph:
    return Graph(n)


def from_edges(n: int, edges) -> Graph:
    return Graph(n).add_edges(np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges))


def add_edge(G: Graph, u: int, v: int) -> Graph:
    return G.add_edge(u, v)


def union(G1: Graph, G2: Graph) -> Graph:
    if G1.n != G2.n:
        raise ValueError(f"cannot union graphs on {G1.n} and {G2.n} vertices")
    g = Graph.__new__(Graph)
    g.n = G1.n
    g.rows = G1.rows | G2.rows
    g.m = int(np.bitwise_count(g.rows).sum()) // 2
    return g


def external_neighborhood(G: Graph, X) -> VertexSet:
    return G.external_neighborhood(X)


def is_connected(G: Graph) -> bool:
    return G.is_connected()


def min_degree(G: Graph) -> int:
    return G.min_degree()


# small named graphs used throughout the tests and the CLI

def path_graph(n: int) -> Graph:
    return from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def star_graph(leaves: int) -> Graph:
    return from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return from_edges(10, outer + spokes + inner)
