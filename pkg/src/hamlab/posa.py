"""Pósa rotation-extension: rotations, endpoint closures, boosters, sprinkling.

Two layers live here.  The small-graph layer (``PathState``, ``rotate``,
``endpoint_closure``, ``find_boosters``) works on Python lists and copies
paths freely; it is meant for exact checks against the oracle.  The engine
layer (``grow_longest_path``, ``sprinkle``, ``solve``) drives the compiled
kernels in ``_engine`` and scales to tens of thousands of vertices.

An ``exhausted`` verdict only says the engine gave up; it is not a proof of
non-Hamiltonicity.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import _engine
from .graph import Graph, VertexSet
from .oracle import DEFAULT_LIMIT, OracleLimit, hamiltonian_exact, longest_path_exact, longest_path_order

CLOSES_CYCLE = "closes-hamilton-cycle"
EXTENDS_PATH = "extends-longest-path"


class PathError(ValueError):
    pass


@dataclass(frozen=True)
class PathState:
    graph: Graph
    order: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(int(v) for v in self.order))
        if len(set(self.order)) != len(self.order):
            raise PathError("path repeats a vertex")
        for a, b in zip(self.order, self.order[1:]):
            if not self.graph.has_edge(a, b):
                raise PathError(f"consecutive path vertices {a},{b} are not adjacent")

    @property
    def position(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.order)}

    @property
    def length(self) -> int:
        return len(self.order) - 1

    @property
    def ends(self) -> tuple[int, int]:
        return self.order[0], self.order[-1]

    def reversed(self) -> "PathState":
        return PathState(self.graph, self.order[::-1])


def rotate(P: PathState, pivot_edge: tuple[int, int]) -> PathState:
    """Rotate the free end ``v_l`` about the edge ``(v_l, v_i)``; ``v_0`` stays put."""
    end, pivot = int(pivot_edge[0]), int(pivot_edge[1])
    order = P.order
    if end != order[-1]:
        raise PathError(f"{end} is not the free endpoint {order[-1]}")
    if not P.graph.has_edge(end, pivot):
        raise PathError(f"pivot ({end}, {pivot}) is not an edge")
    i = P.position.get(pivot)
    if i is None or i > len(order) - 3:
        raise PathError(f"pivot {pivot} must be an interior vertex not next to the free end")
    return PathState(P.graph, order[: i + 1] + order[i + 1 :][::-1])


@dataclass
class EndpointClosure:
    fixed: int
    reachable: VertexSet
    witness: dict[int, tuple[int, ...]]
    paths: dict[int, PathState] = field(repr=False)


def endpoint_closure(P: PathState, fixed: int, max_states: int = 1_000_000) -> EndpointClosure:
    """Free endpoints reachable by rotations that keep ``fixed`` in place.

    Breadth-first over whole paths, since a vertex can become an endpoint only
    through a path other than the first one ending at some earlier endpoint.
    ``witness[y]`` is the shortest pivot sequence that turns ``P`` into
    ``paths[y]``. Raises ``PathError`` past ``max_states`` distinct paths.
    """
    if fixed == P.order[0]:
        start = P
    elif fixed == P.order[-1]:
        start = P.reversed()
    else:
        raise PathError(f"{fixed} is not an endpoint of the path")
    G = P.graph
    root = start.order[-1]
    paths = {root: start}
    witness: dict[int, tuple[int, ...]] = {root: ()}
    seen = {start.order}
    queue = deque([(start, ())])
    while queue:
        cur, piv = queue.popleft()
        order = cur.order
        x = order[-1]
        pos = cur.position
        for w in map(int, G.neighbors(x)):
            i = pos.get(w)
            if i is None or i > len(order) - 3:
                continue
            nxt = rotate(cur, (x, w))
            if nxt.order in seen:
                continue
            seen.add(nxt.order)
            if len(seen) > max_states:
                raise PathError(f"rotation closure exceeds {max_states} paths")
            y = nxt.order[-1]
            if y not in paths:
                paths[y] = nxt
                witness[y] = piv + (w,)
            queue.append((nxt, piv + (w,)))
    reach = VertexSet.from_iter(G.n, paths)
    return EndpointClosure(int(fixed), reach, witness, paths)


@dataclass
class BoosterSet:
    pairs: dict[tuple[int, int], str]

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __contains__(self, e) -> bool:
        u, v = sorted(map(int, e))
        return (u, v) in self.pairs


def _require_connected_non_hamiltonian(G: Graph, limit: OracleLimit) -> None:
    if not G.is_connected():
        raise ValueError("graph is disconnected")
    if hamiltonian_exact(G, limit):
        raise ValueError("graph is Hamiltonian; boosters are undefined")


def find_boosters(G: Graph, path=None, limit: OracleLimit = DEFAULT_LIMIT) -> BoosterSet:
    """Pairs ``xy`` with ``x`` in R(v0) and ``y`` in R(x), restricted to non-edges.

    ``path`` must be a longest path of ``G``; by default one is taken from the
    exact oracle, which is what makes every returned pair a genuine booster.
    """
    _require_connected_non_hamiltonian(G, limit)
    P = PathState(G, path if path is not None else longest_path_order(G, limit))
    effect = CLOSES_CYCLE if len(P.order) == G.n else EXTENDS_PATH
    first = endpoint_closure(P, P.order[0])
    pairs: dict[tuple[int, int], str] = {}
    for x, Px in first.paths.items():
        for y in endpoint_closure(Px, x).reachable:
            if not G.has_edge(x, y):
                pairs[(min(x, y), max(x, y))] = effect
    return BoosterSet(pairs)


def is_booster(G: Graph, e, limit: OracleLimit = DEFAULT_LIMIT) -> bool:
    """Ground truth: ``G+e`` is Hamiltonian or has a longer longest path than ``G``."""
    u, v = map(int, e)
    if G.has_edge(u, v):
        raise ValueError(f"({u}, {v}) is already an edge")
    H = G.copy().add_edge(u, v)
    return longest_path_exact(H, limit) > longest_path_exact(G, limit) or hamiltonian_exact(H, limit)


def posa_bound_check(G: Graph, k: int | None = None, limit: OracleLimit = DEFAULT_LIMIT) -> bool:
    """Check ``|N(R) minus R| <= 2|R| - 1`` for the closure R of a longest path.

    With ``k`` given (the caller's 2-expansion parameter) also require ``|R| >= k + 1``.
    """
    _require_connected_non_hamiltonian(G, limit)
    P = PathState(G, longest_path_order(G, limit))
    R = endpoint_closure(P, P.order[0]).reachable
    size = len(R)
    ok = len(G.external_neighborhood(R)) <= 2 * size - 1
    if k is not None:
        ok = ok and size >= k + 1
    return ok


# engine layer


@dataclass
class HamiltonResult:
    verdict: str
    cycle: np.ndarray | None
    edges_consumed: int
    boosters_hit: int
    path_length: int
    trace: np.ndarray
    rotations: int = 0
    searches: int = 0
    consumed: np.ndarray = field(default_factory=lambda: np.empty((0, 2), dtype=np.int64), repr=False)

    @property
    def found(self) -> bool:
        return self.verdict == "found"


def default_cap(n: int) -> int:
    return 4 * n


def _start_order(G: Graph, start) -> np.ndarray:
    if start is None:
        return np.zeros(1, dtype=np.int64)
    order = start.order if isinstance(start, PathState) else tuple(start)
    PathState(G, order)
    return np.asarray(order, dtype=np.int64)


def _engine_state(G: Graph, start, copy: bool):
    st = _engine.new_state(G.rows, copy=copy)
    _engine.init_path(st["adj"], st["order"], st["pos"], st["onpath"], st["offdeg"], st["meta"],
                      _start_order(G, start))
    return st


def _args(st):
    return st["adj"], st["order"], st["pos"], st["onpath"], st["offdeg"], st["touched"], st["meta"], st["work"]


def grow_longest_path(G: Graph, start=None, rotation_cap: int | None = None) -> PathState:
    """Extend greedily, then by rotations at both ends, until nothing more is found."""
    st = _engine_state(G, start, copy=False)
    cap = default_cap(G.n) if rotation_cap is None else rotation_cap
    _engine.run(*_args(st), cap)
    plen = int(st["meta"][_engine.PLEN])
    return PathState(G, st["order"][:plen].tolist())


def sprinkle(G: Graph, stream, rotation_cap: int | None = None, copy: bool = True,
             start=None, require_connected: bool = True) -> HamiltonResult:
    """Add stream edges one at a time, making rotation-extension progress in between.

    With ``copy=False`` the engine takes ownership of ``G.rows`` and writes the
    consumed stream edges into it (``G.m`` is then stale).
    """
    if require_connected and not G.is_connected():
        raise ValueError("sprinkling needs a connected base graph")
    edges = np.asarray(stream, dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= G.n or np.any(edges[:, 0] == edges[:, 1])):
        raise ValueError("stream contains a loop or an out-of-range vertex")
    st = _engine_state(G, start, copy)
    cap = default_cap(G.n) if rotation_cap is None else rotation_cap
    trace = np.zeros(len(edges), dtype=np.int64)
    out = np.zeros(3, dtype=np.int64)
    _engine.sprinkle(*_args(st), cap, edges, trace, out)
    status, consumed, hits = (int(x) for x in out)
    plen = int(st["meta"][_engine.PLEN])
    found = status == _engine.FOUND
    return HamiltonResult(
        verdict="found" if found else "exhausted",
        cycle=st["order"][: G.n].copy() if found else None,
        edges_consumed=consumed,
        boosters_hit=hits,
        path_length=plen - 1,
        trace=trace[:consumed],
        rotations=int(st["meta"][_engine.ROTATIONS]),
        searches=int(st["meta"][_engine.SEARCHES]),
        consumed=edges[:consumed].copy(),
    )


def solve(G: Graph, rotation_cap: int | None = None, copy: bool = True) -> HamiltonResult:
    """Run the engine on ``G`` alone.  Disconnected graphs are reported exhausted at once."""
    if G.n >= 3 and G.is_connected():
        return sprinkle(G, np.empty((0, 2), dtype=np.int64), rotation_cap, copy=copy, require_connected=False)
    return HamiltonResult("exhausted", None, 0, 0, 0, np.empty(0, dtype=np.int64))


def verify_hamilton_cycle(G: Graph, cycle) -> bool:
    c = np.asarray(cycle, dtype=np.int64).ravel()
    n = G.n
    if n < 3 or c.size != n or c.min() < 0 or c.max() >= n or np.unique(c).size != n:
        return False
    nxt = np.roll(c, -1)
    bits = (G.rows[c, nxt >> 6] >> (nxt & 63).astype(np.uint64)) & np.uint64(1)
    return bool(bits.all())


def rotation_maximal(G: Graph, P: PathState) -> bool:
    """Certificate that ``P`` cannot grow by extension or by one rotation at either end."""
    on = set(P.order)
    for Q in (P, P.reversed()):
        end = Q.order[-1]
        if any(int(u) not in on for u in G.neighbors(end)):
            return False
        pos = Q.position
        for w in map(int, G.neighbors(end)):
            i = pos[w]
            if i <= len(Q.order) - 3:
                y = Q.order[i + 1]
                if any(int(u) not in on for u in G.neighbors(y)):
                    return False
    return True


def format_certificate(result: HamiltonResult) -> str:
    """Cycle, then consumed stream edges, one item per line."""
    if not result.found:
        raise ValueError("only a found verdict has a certificate")
    lines = [f"cycle {len(result.cycle)}"]
    lines += [str(int(v)) for v in result.cycle]
    lines.append(f"consumed {len(result.consumed)}")
    lines += [f"{int(u)} {int(v)}" for u, v in result.consumed]
    return "\n".join(lines) + "\n"


def parse_certificate(text: str) -> tuple[np.ndarray, np.ndarray]:
    lines = text.strip("\n").split("\n")
    head, k = lines[0].split()
    if head != "cycle":
        raise ValueError("certificate must start with 'cycle <n>'")
    k = int(k)
    cycle = np.array([int(x) for x in lines[1 : 1 + k]], dtype=np.int64)
    head2, m = lines[1 + k].split()
    if head2 != "consumed":
        raise ValueError("missing 'consumed <m>' section")
    m = int(m)
    edges = np.array([[int(a) for a in ln.split()] for ln in lines[2 + k : 2 + k + m]], dtype=np.int64)
    return cycle, edges.reshape(-1, 2)


def check_certificate(G: Graph, text: str) -> bool:
    cycle, edges = parse_certificate(text)
    H = G.copy().add_edges(edges) if len(edges) else G
    return verify_hamilton_cycle(H, cycle)
