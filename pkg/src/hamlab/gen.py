"""Seeded random graphs, uniform edge streams and deterministic seed graphs.

Stream derivation rule: the generator for ``RngStream(master_seed, key)`` is
``numpy.random.Generator(PCG64(SeedSequence(master_seed, spawn_key=key)))``
where ``key`` is the tuple of non-negative stream ids (a bare integer id is the
1-tuple).  SeedSequence hashing makes sibling keys behave as independent
streams and the output is identical on every platform numpy supports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graph import Graph, VertexSet

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_id: int | tuple[int, ...] = 0

    def __post_init__(self):
        for x in (self.master_seed, *self.key):
            if not 0 <= int(x) <= _MASK64:
                raise ValueError(f"seed and stream ids must be 64-bit unsigned, got {x}")

    @property
    def key(self) -> tuple[int, ...]:
        sid = self.stream_id
        return tuple(int(s) for s in sid) if isinstance(sid, tuple) else (int(sid),)

    def child(self, *ids: int) -> "RngStream":
        return RngStream(self.master_seed, self.key + tuple(int(i) for i in ids))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.master_seed), spawn_key=self.key)
        return np.random.Generator(np.random.PCG64(ss))


def _as_stream(rng) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    return RngStream(int(rng))


def ceil_alpha_n(alpha: float, n: int) -> int:
    """``ceil(alpha * n)`` evaluated on the decimal value of ``alpha``.

    ``alpha`` is read through its shortest decimal repr, so ``0.1 * 30`` is the
    exact integer 3 and not 4 as float rounding would suggest.
    """
    exact = Fraction(repr(float(alpha))) * int(n)
    return math.ceil(exact)


# pair index <-> (u, v) with u < v, lexicographic by u

def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def decode_pairs(idx: np.ndarray, n: int) -> np.ndarray:
    t = np.asarray(idx, dtype=np.int64)
    b = 2 * n - 1
    u = np.floor((b - np.sqrt(np.maximum(b * b - 8.0 * t, 0.0))) / 2).astype(np.int64)
    u = np.clip(u, 0, n - 2)

    def offset(x):
        return x * (2 * n - x - 1) // 2

    # float error is at most one row either way
    u = np.where(offset(u) > t, u - 1, u)
    u = np.where(offset(u + 1) <= t, u + 1, u)
    v = t - offset(u) + u + 1
    return np.column_stack((u, v))


def encode_pairs(pairs: np.ndarray, n: int) -> np.ndarray:
    e = np.sort(np.asarray(pairs, dtype=np.int64).reshape(-1, 2), axis=1)
    u, v = e[:, 0], e[:, 1]
    return u * (2 * n - u - 1) // 2 + (v - u - 1)


def sample_gnp_edges(n: int, p: float, rng) -> np.ndarray:
    """Edge array of G(n, p) by geometric skipping over the pair index."""
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    total = pair_count(n)
    if total == 0 or p == 0.0:
        return np.empty((0, 2), dtype=np.int64)
    if p == 1.0:
        return decode_pairs(np.arange(total), n)
    gen = _as_stream(rng).generator()
    chunks = []
    last = -1
    while True:
        expected = (total - last - 1) * p
        batch = int(expected + 6 * math.sqrt(expected + 1)) + 64
        steps = gen.geometric(p, size=batch)
        idx = last + np.cumsum(steps)
        done = idx[-1] >= total
        if done:
            idx = idx[idx < total]
        chunks.append(idx)
        if done:
            break
        last = int(idx[-1])
    return decode_pairs(np.concatenate(chunks), n)


def sample_gnp(n: int, p: float, rng) -> Graph:
    return Graph(n).add_edges(sample_gnp_edges(n, p, rng))


def uniform_edge_stream(n: int, m: int, rng) -> np.ndarray:
    """``m`` distinct pairs drawn uniformly without replacement, in random order."""
    total = pair_count(n)
    if m < 0 or m > total:
        raise ValueError(f"edge budget {m} exceeds the {total} pairs of K_{n}")
    if m == 0:
        return np.empty((0, 2), dtype=np.int64)
    idx = _as_stream(rng).generator().choice(total, size=m, replace=False, shuffle=True)
    return decode_pairs(idx, n)


def unbalanced_bipartite(n: int, alpha: float) -> tuple[Graph, VertexSet, VertexSet]:
    """``K_{A,B}`` with ``A = {0..a-1}``, ``a = ceil(alpha n)``, and ``B`` the rest."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    a = ceil_alpha_n(alpha, n)
    if a < 1 or n - a < 1:
        raise ValueError(f"degenerate partition |A|={a}, |B|={n - a}")
    A = VertexSet.from_array(n, np.arange(a))
    B = VertexSet.from_array(n, np.arange(a, n))
    g = Graph(n)
    g.rows[:a] = B.words
    g.rows[a:] = A.words
    g.m = a * (n - a)
    return g, A, B


def clique_blobs(n: int, alpha: float) -> Graph:
    """Disjoint cliques of order ``ceil(alpha n) + 1``; leftovers join the last clique."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    size = ceil_alpha_n(alpha, n) + 1
    if size > n:
        raise ValueError(f"clique order {size} exceeds n={n}")
    blobs = n // size
    g = Graph(n)
    m = 0
    for b in range(blobs):
        lo = b * size
        hi = n if b == blobs - 1 else lo + size
        mask = VertexSet.from_array(n, np.arange(lo, hi)).words
        g.rows[lo:hi] = mask
        k = hi - lo
        m += k * (k - 1) // 2
    idx = np.arange(n)
    g.rows[idx, idx >> 6] ^= np.left_shift(np.uint64(1), (idx & 63).astype(np.uint64))
    g.m = m
    return g


def edgeless(n: int) -> Graph:
    return Graph(n)


@dataclass(frozen=True)
class PerturbationPlan:
    n: int
    alpha: float
    epsilon: float
    p: float
    L: float
    d: int
    lambda1: float
    lambda2: float

    @property
    def lambda0(self) -> float:
        return (1 + self.epsilon) * self.L

    @property
    def split_total(self) -> float:
        """``(lambda1 + lambda2) / n``, the probability budget the two rounds need."""
        return (self.lambda1 + self.lambda2) / self.n

    @property
    def feasible(self) -> bool:
        return self.split_total <= self.p

    @property
    def d_over_log_n(self) -> float:
        return self.d / math.log(self.n) if self.n > 1 else math.inf


def make_plan(n: int, alpha: float, epsilon: float, p: float | None = None) -> PerturbationPlan:
    """Derive ``L``, ``d`` and the two-round rates; ``p`` defaults to ``(1+eps) L / n``."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    L = math.log(1.0 / alpha)
    if p is None:
        p = min(1.0, (1 + epsilon) * L / n)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    lam1 = (1 + epsilon / 2) * L
    lam2 = epsilon * L / 4
    plan = PerturbationPlan(n, alpha, epsilon, p, L, ceil_alpha_n(alpha, n), lam1, lam2)
    assert math.isclose(lam1 + lam2, (1 + 0.75 * epsilon) * L, rel_tol=1e-12)
    return plan


def split_probability(p: float, lambda1: float, lambda2: float) -> tuple[float, float]:
    """Two independent rounds whose union is exactly G(n, p), rates in ratio lambda1:lambda2."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"cannot split edge probability {p}")
    rate = -math.log1p(-p)
    share = lambda1 / (lambda1 + lambda2)
    p1 = -math.expm1(-rate * share)
    p2 = -math.expm1(-rate * (1 - share))
    return p1, p2


__all__ = [
    "RngStream",
    "PerturbationPlan",
    "ceil_alpha_n",
    "clique_blobs",
    "decode_pairs",
    "edgeless",
    "encode_pairs",
    "make_plan",
    "pair_count",
    "sample_gnp",
    "sample_gnp_edges",
    "split_probability",
    "unbalanced_bipartite",
    "uniform_edge_stream",
]
