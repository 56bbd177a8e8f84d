"""Exact Hamiltonicity and longest-path answers for small graphs.

Two independent routes: a subset dynamic programme over (visited set,
endpoint) states, and plain backtracking over vertex orders.  The second one
exists only to check the first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ._bits import ctz, popcount
from .graph import Graph


@dataclass(frozen=True)
class OracleLimit:
    max_n_dp: int = 20
    max_n_bruteforce: int = 9
    memory_budget: int = 4 << 30

    def __post_init__(self):
        if self.max_n_bruteforce > self.max_n_dp:
            raise ValueError("max_n_bruteforce must not exceed max_n_dp")
        if self.max_n_dp > 30:
            raise ValueError("subset DP is limited to 30 vertices")


DEFAULT_LIMIT = OracleLimit()


class OracleLimitError(ValueError):
    pass


def _small_adj(G: Graph) -> np.ndarray:
    # n <= 30 so each row fits in its first word
    return G.rows[:, 0].astype(np.int64)


def _guard(G: Graph, limit: OracleLimit) -> None:
    if G.n > limit.max_n_dp:
        raise OracleLimitError(f"n={G.n} exceeds the subset-DP cap {limit.max_n_dp}")
    if (1 << G.n) * G.n > limit.memory_budget:
        raise OracleLimitError(f"subset DP for n={G.n} exceeds the memory budget")


@njit(cache=True)
def _ham_cycle_dp(adj, n):
    # reach[mask]: endpoints v of paths that start at 0 and cover exactly mask
    size = 1 << n
    reach = np.zeros(size, dtype=np.int64)
    reach[1] = 1
    for mask in range(1, size, 2):
        r = reach[mask]
        while r:
            v = ctz(np.uint64(r))
            r &= r - 1
            cand = adj[v] & ~mask
            while cand:
                u = ctz(np.uint64(cand))
                cand &= cand - 1
                reach[mask | (1 << u)] |= 1 << u
    return reach


@njit(cache=True)
def _path_dp(adj, n):
    size = 1 << n
    reach = np.zeros(size, dtype=np.int64)
    for v in range(n):
        reach[1 << v] = 1 << v
    best_mask = 1
    best = 1
    for mask in range(1, size):
        r = reach[mask]
        if r == 0:
            continue
        c = popcount(np.uint64(mask))
        if c > best:
            best = c
            best_mask = mask
        while r:
            v = ctz(np.uint64(r))
            r &= r - 1
            cand = adj[v] & ~mask
            while cand:
                u = ctz(np.uint64(cand))
                cand &= cand - 1
                reach[mask | (1 << u)] |= 1 << u
    return reach, best_mask, best


def hamiltonian_exact(G: Graph, limit: OracleLimit = DEFAULT_LIMIT) -> bool:
    """True iff ``G`` has a Hamilton cycle (which needs ``n >= 3``)."""
    _guard(G, limit)
    if G.n < 3:
        return False
    adj = _small_adj(G)
    reach = _ham_cycle_dp(adj, G.n)
    return bool(reach[-1] & adj[0])


def hamilton_cycle_exact(G: Graph, limit: OracleLimit = DEFAULT_LIMIT) -> list[int] | None:
    """A Hamilton cycle starting at vertex 0, or None when there is none."""
    _guard(G, limit)
    n = G.n
    if n < 3:
        return None
    adj = _small_adj(G)
    reach = _ham_cycle_dp(adj, n)
    mask = (1 << n) - 1
    ends = int(reach[mask]) & int(adj[0])
    if not ends:
        return None
    v = (ends & -ends).bit_length() - 1
    cycle = [v]
    while mask != 1:
        prev = mask ^ (1 << v)
        cand = int(reach[prev]) & int(adj[v])
        u = (cand & -cand).bit_length() - 1
        if prev != 1:
            cycle.append(u)
        mask, v = prev, u
    cycle.append(0)
    cycle.reverse()
    return cycle


def longest_path_exact(G: Graph, limit: OracleLimit = DEFAULT_LIMIT) -> int:
    """Number of edges on a longest path of ``G``."""
    _guard(G, limit)
    _, _, best = _path_dp(_small_adj(G), G.n)
    return int(best) - 1


def longest_path_order(G: Graph, limit: OracleLimit = DEFAULT_LIMIT) -> list[int]:
    """A longest path as a vertex sequence, reconstructed from the DP table."""
    _guard(G, limit)
    adj = _small_adj(G)
    reach, mask, _ = _path_dp(adj, G.n)
    mask = int(mask)
    ends = int(reach[mask])
    v = (ends & -ends).bit_length() - 1
    order = [v]
    while mask != (1 << v):
        prev_mask = mask ^ (1 << v)
        cand = int(reach[prev_mask]) & int(adj[v])
        u = (cand & -cand).bit_length() - 1
        order.append(u)
        mask, v = prev_mask, u
    order.reverse()
    return order


def hamiltonian_bruteforce(G: Graph, limit: OracleLimit = DEFAULT_LIMIT) -> bool:
    """Backtracking over vertex orders anchored at 0; shares no code with the DP."""
    n = G.n
    if n > limit.max_n_bruteforce:
        raise OracleLimitError(f"n={n} exceeds the brute-force cap {limit.max_n_bruteforce}")
    if n < 3:
        return False
    nbrs = [set(int(u) for u in G.neighbors(v)) for v in range(n)]
    if any(len(s) < 2 for s in nbrs):
        return False
    used = [False] * n
    used[0] = True

    def extend(v: int, depth: int) -> bool:
        if depth == n:
            return 0 in nbrs[v]
        for u in sorted(nbrs[v]):
            if not used[u]:
                used[u] = True
                if extend(u, depth + 1):
                    return True
                used[u] = False
        return False

    return extend(0, 1)
