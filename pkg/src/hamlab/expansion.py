"""Certify or falsify vertex-expansion conditions.

The basic condition is ``|N(X) \\ X| >= need(|X|)`` for every vertex set ``X``
with ``k_min <= |X| <= k_bound``.  For the Posa condition ``need(s) = 2s``.
Exact mode enumerates every set and can certify; randomized mode measures
structured and random candidates and can only falsify, so its positive answer
is ``not-falsified``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from math import comb

import numpy as np
from numba import njit

from . import _bits
from ._bits import ONE, ZERO, ctz, popcount
from .gen import RngStream
from .graph import Graph, VertexSet, n_words

CERTIFIED = "certified"
FALSIFIED = "falsified"
NOT_FALSIFIED = "not-falsified"
VERDICTS = (CERTIFIED, FALSIFIED, NOT_FALSIFIED)

DEFAULT_MAX_SETS = 1 << 24


class ExpansionBudgetError(ValueError):
    pass


@dataclass(frozen=True)
class ExpansionSpec:
    mode: str = "exact"
    k_bound: int = 1
    factor: float = 2.0
    sample_budget: int = 20_000
    k_min: int = 1

    def __post_init__(self):
        if self.mode not in ("exact", "randomized"):
            raise ValueError(f"mode must be 'exact' or 'randomized', got {self.mode!r}")
        if not self.factor > 0:
            raise ValueError(f"factor must be positive, got {self.factor}")
        if self.k_min < 1 or self.k_bound < 0:
            raise ValueError("set-size bounds must be positive")
        if self.sample_budget < 1:
            raise ValueError("sample_budget must be at least 1")

    def check_n(self, n: int) -> None:
        if self.k_bound > n:
            raise ValueError(f"k_bound={self.k_bound} exceeds n={n}")

    def need(self) -> np.ndarray:
        """Smallest admissible external size for each set size (0 = unchecked)."""
        s = np.arange(self.k_bound + 1)
        out = np.ceil(self.factor * s - 1e-9).astype(np.int64)
        out[: self.k_min] = 0
        return out


@dataclass
class ExpansionReport:
    verdict: str
    witness: VertexSet | None = None
    witness_external: int | None = None
    sets_checked: int = 0
    label: str = ""
    note: str = ""
    partner: VertexSet | None = None
    budget: int | None = None

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == FALSIFIED and self.witness is None:
            raise ValueError("a falsified report needs a witness")

    @property
    def falsified(self) -> bool:
        return self.verdict == FALSIFIED

    def to_record(self) -> dict:
        rec = {
            "label": self.label,
            "verdict": self.verdict,
            "sets_checked": int(self.sets_checked),
            "budget": self.budget,
        }
        if self.witness is not None:
            rec["witness"] = [int(v) for v in self.witness]
            rec["witness_size"] = len(self.witness)
            rec["witness_external"] = self.witness_external
        if self.partner is not None:
            rec["partner"] = [int(v) for v in self.partner]
        if self.note:
            rec["note"] = self.note
        return rec

    def summary(self) -> str:
        head = f"{self.label or 'expansion'}: {self.verdict} ({self.sets_checked} sets checked)"
        if self.witness is not None:
            head += f"; witness of size {len(self.witness)} with external size {self.witness_external}"
        if self.note:
            head += f"; {self.note}"
        return head


def _vset(n: int, verts) -> VertexSet:
    return VertexSet.from_array(n, np.asarray(verts, dtype=np.int64))


def _measure(G: Graph, X: VertexSet) -> int:
    return len(G.external_neighborhood(X))


def _falsified(G: Graph, verts, need: np.ndarray, checked: int, label: str, budget=None) -> ExpansionReport:
    X = _vset(G.n, verts)
    ext = _measure(G, X)
    # re-measured through graph-core, independent of the kernel that found it
    assert ext < need[len(X)], "witness does not violate the condition"
    return ExpansionReport(FALSIFIED, X, ext, checked, label, budget=budget)


# exact enumeration

@njit(cache=True, nogil=True)
def _enumerate(rows, need, k_min, k_max, witness):
    """Scan all sets of size k_min..k_max in lexicographic order.

    Returns (size, external, sets_checked); size is -1 when nothing violates.
    """
    n, words = rows.shape
    idx = np.zeros(k_max + 1, dtype=np.int64)
    xb = np.zeros(words, dtype=np.uint64)
    acc = np.zeros(words, dtype=np.uint64)
    checked = 0
    for s in range(k_min, k_max + 1):
        if s > n:
            break
        for j in range(s):
            idx[j] = j
        while True:
            for w in range(words):
                xb[w] = ZERO
                acc[w] = ZERO
            for j in range(s):
                v = idx[j]
                xb[v >> 6] |= ONE << np.uint64(v & 63)
                for w in range(words):
                    acc[w] |= rows[v, w]
            ext = 0
            for w in range(words):
                ext += popcount(acc[w] & ~xb[w])
            checked += 1
            if ext < need[s]:
                for j in range(s):
                    witness[j] = idx[j]
                return s, ext, checked
            j = s - 1
            while j >= 0 and idx[j] == n - s + j:
                j -= 1
            if j < 0:
                break
            idx[j] += 1
            for t in range(j + 1, s):
                idx[t] = idx[t - 1] + 1
    return -1, 0, checked


def count_sets(n: int, k_min: int, k_max: int) -> int:
    return sum(comb(n, s) for s in range(k_min, min(k_max, n) + 1))


def check_expander_exact(G: Graph, spec: ExpansionSpec, max_sets: int = DEFAULT_MAX_SETS) -> ExpansionReport:
    """Exhaustive verdict over every ``X`` with ``k_min <= |X| <= k_bound``."""
    spec.check_n(G.n)
    total = count_sets(G.n, spec.k_min, spec.k_bound)
    if total > max_sets:
        raise ExpansionBudgetError(
            f"{total} sets exceed the enumeration budget {max_sets}; use randomized mode"
        )
    need = spec.need()
    if spec.k_bound < spec.k_min:
        return ExpansionReport(CERTIFIED, sets_checked=0, label="expander", note="empty size range")
    witness = np.zeros(spec.k_bound + 1, dtype=np.int64)
    s, _, checked = _enumerate(G.rows, need, spec.k_min, spec.k_bound, witness)
    if s < 0:
        return ExpansionReport(CERTIFIED, sets_checked=int(checked), label="expander")
    return _falsified(G, witness[:s], need, int(checked), "expander")


def exact_expansion_parameter(G: Graph, factor: float = 2.0, max_sets: int = DEFAULT_MAX_SETS) -> int:
    """Largest ``k`` such that every ``X`` with ``|X| <= k`` has ``|N(X) \\ X| >= factor |X|``."""
    n = G.n
    need = ExpansionSpec(k_bound=n, factor=factor).need()
    witness = np.zeros(n + 1, dtype=np.int64)
    used = 0
    for s in range(1, n + 1):
        used += comb(n, s)
        if used > max_sets:
            raise ExpansionBudgetError(f"more than {max_sets} sets needed; graph too large")
        got, _, _ = _enumerate(G.rows, need, s, s, witness)
        if got >= 0:
            return s - 1
    return n


# randomized falsification

@njit(cache=True, nogil=True)
def _scan_prefix(rows, perm, need, checkpoints):
    """Measure prefixes of ``perm`` at the listed sizes; first violating size or -1."""
    words = rows.shape[1]
    xb = np.zeros(words, dtype=np.uint64)
    acc = np.zeros(words, dtype=np.uint64)
    k = 0
    for c in range(checkpoints.shape[0]):
        s = checkpoints[c]
        while k < s:
            v = perm[k]
            xb[v >> 6] |= ONE << np.uint64(v & 63)
            for w in range(words):
                acc[w] |= rows[v, w]
            k += 1
        ext = 0
        for w in range(words):
            ext += popcount(acc[w] & ~xb[w])
        if ext < need[s]:
            return s, ext, c + 1
    return -1, 0, checkpoints.shape[0]


@njit(cache=True, nogil=True)
def _bfs_order(rows, seed, limit):
    n, words = rows.shape
    out = np.empty(limit, dtype=np.int64)
    seen = np.zeros(words, dtype=np.uint64)
    seen[seed >> 6] |= ONE << np.uint64(seed & 63)
    out[0] = seed
    head = 0
    tail = 1
    while head < tail and tail < limit:
        v = out[head]
        head += 1
        for w in range(words):
            x = rows[v, w] & ~seen[w]
            seen[w] |= x
            while x != ZERO and tail < limit:
                out[tail] = w * 64 + ctz(x)
                tail += 1
                x &= x - ONE
    return out[:tail]


@njit(cache=True, nogil=True)
def _greedy_grow(rows, deg, seed, need, k_min, k_max, order):
    """Grow ``X`` from ``seed`` by the vertex that adds the fewest new neighbours.

    Candidates are vertices within distance two; one outside the closed
    neighbourhood also pays for itself.

    Every size up to ``k_max`` is measured.  ``order`` receives the growth
    order.  Returns (violating size or -1, its external size, sizes measured).
    """
    n, words = rows.shape
    in_x = np.zeros(n, dtype=np.uint8)
    closed = np.zeros(n, dtype=np.uint8)
    seen_closed = np.zeros(n, dtype=np.int64)  # closed neighbours of each vertex
    heap = [(np.int64(0), np.int64(0))]
    heap.pop()
    size = 0
    n_closed = 0
    measured = 0
    u = seed
    while True:
        # move u into X; its open neighbours become closed
        in_x[u] = 1
        order[size] = u
        size += 1
        if closed[u] == 0:
            closed[u] = 1
            n_closed += 1
            for w in range(words):
                x = rows[u, w]
                while x != ZERO:
                    t = w * 64 + ctz(x)
                    x &= x - ONE
                    seen_closed[t] += 1
                    if in_x[t] == 0:
                        heapq.heappush(heap, (deg[t] - seen_closed[t] + 1 - closed[t], t))
        for w in range(words):
            x = rows[u, w]
            while x != ZERO:
                v = w * 64 + ctz(x)
                x &= x - ONE
                if closed[v] == 1:
                    continue
                closed[v] = 1
                n_closed += 1
                heapq.heappush(heap, (deg[v] - seen_closed[v], v))
                for w2 in range(words):
                    y = rows[v, w2]
                    while y != ZERO:
                        t = w2 * 64 + ctz(y)
                        y &= y - ONE
                        seen_closed[t] += 1
                        if in_x[t] == 0:
                            heapq.heappush(heap, (deg[t] - seen_closed[t] + 1 - closed[t], t))
        ext = n_closed - size
        if size >= k_min:
            measured += 1
            if ext < need[size]:
                return size, ext, measured
        if size >= k_max:
            return -1, 0, measured
        u = -1
        while len(heap) > 0:
            c, t = heapq.heappop(heap)
            if in_x[t] == 0 and c == deg[t] - seen_closed[t] + 1 - closed[t]:
                u = t
                break
        if u < 0:
            # the component is used up; continue with the lowest vertex outside it
            for t in range(n):
                if in_x[t] == 0:
                    u = t
                    break
            if u < 0:
                return -1, 0, measured


def log_grid(k_min: int, k_max: int, ratio: float = 1.15, dense_below: int = 16) -> np.ndarray:
    """Sizes in ``[k_min, k_max]``: every size up to ``dense_below``, then geometric."""
    if k_max < k_min:
        return np.empty(0, dtype=np.int64)
    pts = set(range(k_min, min(k_max, dense_below) + 1))
    x = float(max(k_min, dense_below))
    while x < k_max:
        pts.add(int(round(x)))
        x *= ratio
    pts.add(k_min)
    pts.add(k_max)
    return np.array(sorted(p for p in pts if k_min <= p <= k_max), dtype=np.int64)


def _falsify(G: Graph, need: np.ndarray, k_min: int, k_max: int, rng: RngStream, budget: int, label: str):
    n = G.n
    if k_max < k_min:
        return ExpansionReport(CERTIFIED, sets_checked=0, label=label, note="empty size range", budget=budget)
    deg = G.degrees().astype(np.int64)
    checked = 0
    # singletons exactly, straight from the degrees
    if k_min <= 1 <= k_max:
        bad = np.flatnonzero(deg < need[1])
        checked += n
        if bad.size:
            return _falsified(G, bad[:1], need, checked, label, budget)
    gen = rng.generator()
    grid = log_grid(k_min, k_max)
    by_degree = np.argsort(deg, kind="stable")
    order = np.empty(max(k_max, 1), dtype=np.int64)

    def prefix(perm):
        nonlocal checked
        pts = grid[grid <= perm.shape[0]]
        if pts.size == 0:
            return None
        s, _, c = _scan_prefix(G.rows, perm, need, pts)
        checked += int(c)
        return None if s < 0 else perm[:s]

    def greedy(seed):
        nonlocal checked
        s, _, c = _greedy_grow(G.rows, deg, int(seed), need, k_min, k_max, order)
        checked += int(c)
        return None if s < 0 else order[:s].copy()

    def ball(seed):
        return prefix(_bfs_order(G.rows, int(seed), k_max))

    w = prefix(by_degree[:k_max])
    if w is not None:
        return _falsified(G, w, need, checked, label, budget)
    rank = 0
    while checked < budget:
        low = by_degree[rank % n]
        rand_seed = int(gen.integers(n))
        for attempt in (
            lambda: greedy(low),
            lambda: ball(low),
            lambda: prefix(gen.permutation(n)[:k_max]),
            lambda: greedy(rand_seed),
            lambda: ball(rand_seed),
        ):
            w = attempt()
            if w is not None:
                return _falsified(G, w, need, checked, label, budget)
            if checked >= budget:
                break
        rank += 1
    return ExpansionReport(NOT_FALSIFIED, sets_checked=checked, label=label, budget=budget)


def falsify_expander_randomized(G: Graph, spec: ExpansionSpec, rng) -> ExpansionReport:
    """One-sided search for a set that expands too little; never certifies a non-empty range.

    Candidates: all singletons, prefixes of the degree order, greedy
    low-expansion growth and BFS balls from low-degree and random seeds, and
    uniformly random sets, each measured on a log-spaced size grid.
    """
    spec.check_n(G.n)
    if not isinstance(rng, RngStream):
        rng = RngStream(int(rng))
    return _falsify(G, spec.need(), spec.k_min, spec.k_bound, rng, spec.sample_budget, "expander")


def check_expander(G: Graph, spec: ExpansionSpec, rng=0) -> ExpansionReport:
    if spec.mode == "exact":
        return check_expander_exact(G, spec)
    return falsify_expander_randomized(G, spec, rng)


# properties of the random round

@dataclass(frozen=True)
class E123Params:
    n: int
    K: float
    lam: float
    d: int
    eta: float = 0.0

    def __post_init__(self):
        if not self.K > 0 or not self.lam > 0:
            raise ValueError("K and lambda must be positive")
        if self.n < 4 or not 0 <= self.d <= self.n:
            raise ValueError(f"invalid sizes n={self.n} d={self.d}")
        if self.e1_low > self.e2_low:
            raise ValueError(
                f"band boundaries out of order: K d / lambda = {self.e1_low:.1f} > K n / (2 lambda) = {self.e2_low:.1f}"
            )

    @property
    def e1_low(self) -> float:
        return self.K * self.d / self.lam

    @property
    def e2_low(self) -> float:
        return self.K * self.n / (2 * self.lam)

    @property
    def quarter(self) -> float:
        return self.n / 4

    @property
    def e2_vacuous(self) -> bool:
        """The middle band reaches past n/4, leaving no sizes for the half-spanning property."""
        return self.e2_low >= self.quarter

    def e1_sizes(self) -> tuple[int, int]:
        lo = math.ceil(self.e1_low)
        hi = math.floor(min(self.e2_low, self.quarter))
        return max(lo, 1), hi

    def e2_sizes(self) -> tuple[int, int]:
        lo = math.floor(self.e2_low) + 1
        hi = math.floor(self.quarter)
        return lo, hi

    def e1_need(self) -> np.ndarray:
        lo, hi = self.e1_sizes()
        s = np.arange(max(hi, 0) + 1)
        # strict: more than lambda |X| / K
        out = np.floor(self.lam * s / self.K + 1e-12).astype(np.int64) + 1
        out[:lo] = 0
        return out

    def e2_need(self) -> np.ndarray:
        lo, hi = self.e2_sizes()
        out = np.full(max(hi, 0) + 1, self.n // 2 + 1, dtype=np.int64)
        out[:lo] = 0
        return out


@njit(cache=True, nogil=True)
def _edge_between(rows, xs, ybits):
    words = rows.shape[1]
    for k in range(xs.shape[0]):
        v = xs[k]
        for w in range(words):
            if rows[v, w] & ybits[w] != ZERO:
                return True
    return False


def _e3_pair(G: Graph, X: np.ndarray, q: int):
    """Best partner for ``X``: vertices outside ``X`` with no edge into it."""
    xs = _vset(G.n, X)
    closed = G.external_neighborhood(xs) | xs
    free = (VertexSet.full(G.n) - closed).to_array()
    if free.size >= q:
        return free[:q]
    return None


E3_PARTNERS = ("sampled", "best")


def _e3_found(n, X, Y, checked, budget, note):
    return ExpansionReport(
        FALSIFIED, _vset(n, X), 0, checked, "E3", partner=_vset(n, Y), budget=budget, note=note,
    )


def check_E3(R: Graph, rng: RngStream, pairs: int = 200, adversarial: bool = True,
             partner: str = "sampled") -> ExpansionReport:
    """Every two disjoint sets of size at least n/4 are joined by an edge.

    ``partner="sampled"`` tests disjoint pairs of uniformly random quarters,
    plus (with ``adversarial``) the lowest-degree quarter against the
    lowest-degree quarter of the rest.

    ``partner="best"`` is stronger: each candidate ``X`` is paired with the
    vertices having no edge into it, so a violation for ``X`` is found iff one
    exists. Candidates are random quarters, plus (with ``adversarial``) the
    lowest-degree quarter and BFS balls.
    """
    if partner not in E3_PARTNERS:
        raise ValueError(f"partner must be one of {E3_PARTNERS}, got {partner!r}")
    n = R.n
    q = math.ceil(n / 4)
    gen = rng.generator()
    by_degree = np.argsort(R.degrees(), kind="stable")
    budget = pairs + int(adversarial)
    checked = 0
    if partner == "sampled":
        cands = []
        if adversarial:
            cands.append(lambda: (by_degree[:q], by_degree[q: 2 * q]))
        for _ in range(pairs):
            cands.append(lambda: np.split(gen.permutation(n)[: 2 * q], [q]))
        for make in cands:
            X, Y = (np.asarray(a, dtype=np.int64) for a in make())
            if Y.size < q:
                continue
            checked += 1
            if not _edge_between(R.rows, X, _vset(n, Y).words):
                return _e3_found(n, X, Y, checked, budget, "no edge between the sampled pair")
        return ExpansionReport(NOT_FALSIFIED, sets_checked=checked, label="E3", budget=budget)
    candidates = [lambda: by_degree[:q]] if adversarial else []
    for t in range(pairs):
        if t % 2 == 0 or not adversarial:
            candidates.append(lambda: gen.permutation(n)[:q])
        else:
            candidates.append(lambda: _bfs_order(R.rows, int(gen.integers(n)), q))
    for make in candidates:
        X = np.asarray(make(), dtype=np.int64)
        if X.size < q:
            continue
        checked += 1
        Y = _e3_pair(R, X, q)
        if Y is not None:
            assert not _edge_between(R.rows, X, _vset(n, Y).words)
            return _e3_found(n, X, Y, checked, budget, "no edge between witness and its non-neighbours")
    return ExpansionReport(NOT_FALSIFIED, sets_checked=checked, label="E3", budget=budget)


def check_E1_E2_E3(R: Graph, params: E123Params, rng, budget: int = 20_000, pairs: int = 200,
                   e3_partner: str = "sampled"):
    """Randomized reports for the three properties of the random round."""
    if R.n != params.n:
        raise ValueError(f"graph has n={R.n}, params say n={params.n}")
    if not isinstance(rng, RngStream):
        rng = RngStream(int(rng))
    lo, hi = params.e1_sizes()
    e1 = _falsify(R, params.e1_need(), lo, hi, rng.child(1), budget, "E1")
    if params.e2_vacuous:
        e2 = ExpansionReport(
            CERTIFIED, sets_checked=0, label="E2", budget=budget,
            note=f"no sizes in the band: K n / (2 lambda) = {params.e2_low:.0f} >= n/4",
        )
    else:
        lo, hi = params.e2_sizes()
        e2 = _falsify(R, params.e2_need(), lo, hi, rng.child(2), budget, "E2")
    e3 = check_E3(R, rng.child(3), pairs, partner=e3_partner)
    return e1, e2, e3


# the union of the seed graph with the first random round

@dataclass
class H1Report:
    small: ExpansionReport
    large: ExpansionReport
    connected: bool
    small_sets_enumerated: int = 0
    d: int = 0
    details: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        if self.large.falsified:
            return FALSIFIED
        if not self.connected:
            return FALSIFIED
        return self.large.verdict if self.large.verdict == NOT_FALSIFIED else CERTIFIED

    @property
    def ok(self) -> bool:
        return self.connected and not self.large.falsified

    def to_record(self) -> dict:
        return {
            "verdict": self.verdict,
            "connected": self.connected,
            "d": self.d,
            "small": self.small.to_record(),
            "large": self.large.to_record(),
            "small_sets_enumerated": self.small_sets_enumerated,
        }


def small_set_bound(d: int) -> int:
    """Largest size covered by the degree argument; uses floor(d/3) which is always safe."""
    return d // 3


def h1_claim_check(G_alpha: Graph, R1: Graph, d: int, rng, budget: int = 20_000) -> H1Report:
    """Two-branch check that the union is connected and 2-expands up to n/4.

    Sets of size at most floor(d/3) are settled by the degree inequality
    ``d - |X| + 1 >= 2|X|`` alone; larger sets go to the randomized falsifier.
    """
    if G_alpha.n != R1.n:
        raise ValueError("graphs must share the vertex set")
    mind = G_alpha.min_degree()
    if mind < d:
        raise ValueError(f"seed graph has minimum degree {mind} < d = {d}")
    if not isinstance(rng, RngStream):
        rng = RngStream(int(rng))
    n = G_alpha.n
    top = small_set_bound(d)
    # a vertex of X has at least d - |X| + 1 neighbours outside X
    assert d - top + 1 >= 2 * top
    small = ExpansionReport(
        CERTIFIED, sets_checked=0, label="H1 small sets",
        note=f"|X| <= {top}: every vertex has at least d - |X| + 1 >= 2|X| neighbours outside X",
    )
    H = G_alpha.union(R1)
    connected = H.is_connected()
    spec = ExpansionSpec("randomized", k_bound=n // 4, factor=2.0, sample_budget=budget, k_min=top + 1)
    large = _falsify(H, spec.need(), spec.k_min, spec.k_bound, rng, budget, "H1 large sets")
    return H1Report(small, large, connected, 0, d)


def binary_entropy(q: float) -> float:
    """Binary entropy in nats, with H(0) = H(1) = 0."""
    if not 0.0 <= q <= 1.0 or math.isnan(q):
        raise ValueError(f"probability must lie in [0, 1], got {q}")
    if q == 0.0 or q == 1.0:
        return 0.0
    return -q * math.log(q) - (1 - q) * math.log1p(-q)


def external_size(G: Graph, X) -> int:
    """Size of ``N(X) \\ X`` through the bit kernel (``X`` as an index array)."""
    xs = np.asarray(list(X), dtype=np.int64)
    xb = np.zeros(n_words(G.n), dtype=np.uint64)
    for v in xs:
        xb[v >> 6] |= np.uint64(1) << np.uint64(v & 63)
    return int(_bits.external_size(G.rows, xs, xb))
