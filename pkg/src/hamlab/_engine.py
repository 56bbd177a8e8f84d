"""Compiled rotation-extension engine.

State lives in flat arrays so the kernels can run without the GIL:

* ``order[:plen]`` is the current path, ``pos[v]`` its inverse (-1 when off path)
* ``onpath`` is the path's vertex set as a bitset
* ``offdeg[v]`` counts neighbours of ``v`` that are off the path
* ``touched[v]`` marks vertices whose adjacency the last run looked at; an
  added edge with no touched endpoint cannot change the outcome of a rerun

Rotation closures are explored breadth-first over free endpoints, keyed by the
endpoint only.  A node stores (parent, pivot index).  Rotating at index ``i``
reverses the suffix after ``i``, so positions map by ``j -> plen + i - j`` for
``j > i``; a node's path is read through that chain of reflections and only
written out when it is needed.  Replaying a rotation a second time undoes it.
"""

import numpy as np
from numba import njit

from ._bits import ONE, ZERO, ctz, set_bit, test_bit

STUCK = 0
FOUND = 1
PROGRESS = 2

# meta slots
PLEN = 0
BUDGET = 1
ROTATIONS = 2
SEARCHES = 3
GEN_OUTER = 4
GEN_INNER = 5
OPENS = 6
DEPTH_OUTER = 7
DEPTH_INNER = 8
META_SIZE = 9

# work rows, one block of five per closure level
PAR = 0
PIV = 1
MARK = 2
STACK = 3
CHAIN = 4
TMP = 10
WORK_ROWS = 11


def new_state(rows, copy=True):
    n = rows.shape[0]
    adj = rows.copy() if copy else rows
    return dict(
        adj=adj,
        order=np.zeros(n, dtype=np.int64),
        pos=-np.ones(n, dtype=np.int64),
        onpath=np.zeros(rows.shape[1], dtype=np.uint64),
        offdeg=np.zeros(n, dtype=np.int64),
        touched=np.zeros(n, dtype=np.uint8),
        meta=np.zeros(META_SIZE, dtype=np.int64),
        work=np.zeros((WORK_ROWS, n + 1), dtype=np.int64),
    )


@njit(cache=True, nogil=True)
def _reverse(order, pos, i, j):
    while i < j:
        a = order[i]
        b = order[j]
        order[i] = b
        order[j] = a
        pos[b] = i
        pos[a] = j
        i += 1
        j -= 1


@njit(cache=True, nogil=True)
def _join(adj, u, onpath, offdeg):
    set_bit(onpath, u)
    for w in range(adj.shape[1]):
        x = adj[u, w]
        while x != ZERO:
            offdeg[w * 64 + ctz(x)] -= 1
            x &= x - ONE


@njit(cache=True, nogil=True)
def _first_off(adj, v, onpath):
    for w in range(adj.shape[1]):
        x = adj[v, w] & ~onpath[w]
        if x != ZERO:
            return w * 64 + ctz(x)
    return -1


@njit(cache=True, nogil=True)
def _best_off(adj, v, onpath, offdeg):
    """Off-path neighbour of ``v`` with the fewest off-path neighbours (lowest index on ties)."""
    best = -1
    bd = adj.shape[0] + 1
    for w in range(adj.shape[1]):
        x = adj[v, w] & ~onpath[w]
        while x != ZERO:
            u = w * 64 + ctz(x)
            x &= x - ONE
            if offdeg[u] < bd:
                bd = offdeg[u]
                best = u
                if bd <= 1:
                    return best
    return best


@njit(cache=True, nogil=True)
def init_path(adj, order, pos, onpath, offdeg, meta, start):
    n = adj.shape[0]
    for v in range(n):
        c = 0
        for w in range(adj.shape[1]):
            x = adj[v, w]
            while x != ZERO:
                c += 1
                x &= x - ONE
        offdeg[v] = c
    for k in range(start.shape[0]):
        v = start[k]
        order[k] = v
        pos[v] = k
        _join(adj, v, onpath, offdeg)
    meta[PLEN] = start.shape[0]


@njit(cache=True, nogil=True)
def _extend_tail(adj, order, pos, onpath, offdeg, touched, plen):
    while True:
        e = order[plen - 1]
        touched[e] = 1
        if offdeg[e] <= 0:
            return plen
        u = _best_off(adj, e, onpath, offdeg)
        order[plen] = u
        pos[u] = plen
        _join(adj, u, onpath, offdeg)
        plen += 1


@njit(cache=True, nogil=True)
def _extend_both(adj, order, pos, onpath, offdeg, touched, meta):
    plen = _extend_tail(adj, order, pos, onpath, offdeg, touched, meta[PLEN])
    touched[order[0]] = 1
    if offdeg[order[0]] > 0:
        _reverse(order, pos, 0, plen - 1)
        plen = _extend_tail(adj, order, pos, onpath, offdeg, touched, plen)
        _reverse(order, pos, 0, plen - 1)
    meta[PLEN] = plen
    return plen


@njit(cache=True, nogil=True)
def _open_cycle(adj, order, pos, onpath, offdeg, meta, tmp):
    """The path closes into a cycle; splice in the lowest outside vertex that touches it."""
    n = adj.shape[0]
    plen = meta[PLEN]
    for u in range(n):
        if pos[u] >= 0:
            continue
        w = -1
        for k in range(adj.shape[1]):
            x = adj[u, k] & onpath[k]
            if x != ZERO:
                w = k * 64 + ctz(x)
                break
        if w < 0:
            continue
        i = pos[w]
        tmp[0] = u
        for k in range(plen - i):
            tmp[1 + k] = order[i + k]
        for k in range(i):
            tmp[1 + plen - i + k] = order[k]
        for k in range(plen + 1):
            order[k] = tmp[k]
            pos[tmp[k]] = k
        _join(adj, u, onpath, offdeg)
        meta[PLEN] = plen + 1
        meta[OPENS] += 1
        return True
    return False


@njit(cache=True, nogil=True)
def _materialise(order, pos, meta, work, level, node):
    """Bring the path to the state of closure node ``node`` of ``level`` (0 outer, 1 inner)."""
    base = 5 * level
    par = work[base + PAR]
    piv = work[base + PIV]
    stack = work[base + STACK]
    chain = work[base + CHAIN]
    plen = meta[PLEN]
    dslot = DEPTH_OUTER + level
    k = 0
    x = node
    while x > 0:
        chain[k] = x
        k += 1
        x = par[x]
    # chain[k-1] is the child of the root, chain[0] is node
    depth = meta[dslot]
    common = 0
    while common < depth and common < k and stack[common] == chain[k - 1 - common]:
        common += 1
    while depth > common:
        depth -= 1
        _reverse(order, pos, piv[stack[depth]] + 1, plen - 1)
        meta[BUDGET] -= 1
    while depth < k:
        t = chain[k - 1 - depth]
        _reverse(order, pos, piv[t] + 1, plen - 1)
        stack[depth] = t
        depth += 1
        meta[BUDGET] -= 1
    meta[dslot] = depth


@njit(cache=True, nogil=True)
def _reflect(j, chain, d, plen, forward):
    # a rotation at index i maps index j > i to plen + i - j and fixes the rest
    if forward:
        for k in range(d - 1, -1, -1):
            i = chain[k]
            if j > i:
                j = plen + i - j
    else:
        for k in range(d):
            i = chain[k]
            if j > i:
                j = plen + i - j
    return j


@njit(cache=True, nogil=True)
def _finish(adj, order, pos, onpath, offdeg, meta, work, pinned):
    """The free endpoint is extendable or closes on ``pinned``; cash that in."""
    n = adj.shape[0]
    plen = meta[PLEN]
    y = order[plen - 1]
    if offdeg[y] > 0:
        u = _best_off(adj, y, onpath, offdeg)
        order[plen] = u
        pos[u] = plen
        _join(adj, u, onpath, offdeg)
        meta[PLEN] = plen + 1
        return PROGRESS
    if plen == n:
        return FOUND
    _open_cycle(adj, order, pos, onpath, offdeg, meta, work[TMP])
    return PROGRESS


@njit(cache=True, nogil=True)
def _closure(adj, order, pos, onpath, offdeg, touched, meta, work, level, has_out):
    """BFS over free endpoints with ``order[0]`` pinned.

    Nodes are explored without touching the path: a node's path is the root
    path seen through its chain of rotations, each a reflection of indices.
    Only a successful node is materialised.  Returns (status, node_count); on
    failure the path is unchanged.
    """
    n = adj.shape[0]
    base = 5 * level
    par = work[base + PAR]
    piv = work[base + PIV]
    mark = work[base + MARK]
    chain = work[base + CHAIN]
    gslot = GEN_OUTER + level
    meta[gslot] += 1
    gen = meta[gslot]
    meta[DEPTH_OUTER + level] = 0
    plen = meta[PLEN]
    pinned = order[0]
    root_end = order[plen - 1]
    touched[pinned] = 1
    touched[root_end] = 1
    mark[root_end] = gen
    par[0] = -1
    piv[0] = -1
    count = 1
    head = 0
    while head < count:
        if meta[BUDGET] <= 0:
            break
        x = head
        head += 1
        d = 0
        t = x
        while t > 0:
            chain[d] = piv[t]
            d += 1
            t = par[t]
        e = order[_reflect(plen - 1, chain, d, plen, False)]
        for wd in range(adj.shape[1]):
            bits = adj[e, wd] & onpath[wd]
            while bits != ZERO:
                w = wd * 64 + ctz(bits)
                bits &= bits - ONE
                i = _reflect(pos[w], chain, d, plen, True)
                if i > plen - 3:
                    continue
                y = order[_reflect(i + 1, chain, d, plen, False)]
                if mark[y] == gen:
                    continue
                mark[y] = gen
                touched[y] = 1
                meta[BUDGET] -= 1
                meta[ROTATIONS] += 1
                ok = offdeg[y] > 0
                if not ok and test_bit(adj[y], pinned):
                    ok = plen == n or has_out
                if ok:
                    _materialise(order, pos, meta, work, level, x)
                    _reverse(order, pos, i + 1, plen - 1)
                    return _finish(adj, order, pos, onpath, offdeg, meta, work, pinned), count
                par[count] = x
                piv[count] = i
                count += 1
    return STUCK, count


@njit(cache=True, nogil=True)
def _search(adj, order, pos, onpath, offdeg, touched, meta, work, cap):
    meta[SEARCHES] += 1
    meta[BUDGET] = cap
    plen = meta[PLEN]
    if plen < 3:
        return STUCK
    has_out = False
    for k in range(plen):
        if offdeg[order[k]] > 0:
            has_out = True
            break
    st, nout = _closure(adj, order, pos, onpath, offdeg, touched, meta, work, 0, has_out)
    if st != STUCK:
        return st
    # double rotations: pin each endpoint x reached above and rotate the other end
    for k in range(nout):
        if meta[BUDGET] <= 0:
            break
        _materialise(order, pos, meta, work, 0, k)
        _reverse(order, pos, 0, plen - 1)
        st, _ = _closure(adj, order, pos, onpath, offdeg, touched, meta, work, 1, has_out)
        if st != STUCK:
            return st
        _reverse(order, pos, 0, plen - 1)
    _materialise(order, pos, meta, work, 0, 0)
    return STUCK


@njit(cache=True, nogil=True)
def run(adj, order, pos, onpath, offdeg, touched, meta, work, cap):
    """Extend and rotate until a Hamilton cycle closes or the search gets stuck."""
    n = adj.shape[0]
    touched[:] = 0
    while True:
        plen = _extend_both(adj, order, pos, onpath, offdeg, touched, meta)
        if plen >= 3 and test_bit(adj[order[plen - 1]], order[0]):
            if plen == n:
                return FOUND
            if _open_cycle(adj, order, pos, onpath, offdeg, meta, work[TMP]):
                continue
        st = _search(adj, order, pos, onpath, offdeg, touched, meta, work, cap)
        if st == FOUND:
            return FOUND
        if st == STUCK:
            return STUCK


@njit(cache=True, nogil=True)
def sprinkle(adj, order, pos, onpath, offdeg, touched, meta, work, cap, stream, trace, out):
    """Consume ``stream`` edge by edge, rerunning the engine whenever it could matter.

    ``trace[k]`` receives the path length (edges) after the k-th stream edge.
    ``out`` receives (status, edges_consumed, boosters_hit).
    """
    status = run(adj, order, pos, onpath, offdeg, touched, meta, work, cap)
    consumed = 0
    hits = 0
    if status != FOUND:
        for k in range(stream.shape[0]):
            u = stream[k, 0]
            v = stream[k, 1]
            consumed = k + 1
            if not test_bit(adj[u], v):
                set_bit(adj[u], v)
                set_bit(adj[v], u)
                if pos[v] < 0:
                    offdeg[u] += 1
                if pos[u] < 0:
                    offdeg[v] += 1
                if touched[u] or touched[v]:
                    before = meta[PLEN]
                    status = run(adj, order, pos, onpath, offdeg, touched, meta, work, cap)
                    if status == FOUND or meta[PLEN] > before:
                        hits += 1
            trace[k] = meta[PLEN] - 1
            if status == FOUND:
                break
    out[0] = status
    out[1] = consumed
    out[2] = hits
