"""Low-level bit kernels shared by the numba-compiled parts of the package.

Vertex ``v`` lives in word ``v >> 6`` at bit ``v & 63`` of a ``uint64`` row.
Padding bits past ``n`` are always zero.
"""

import numpy as np
from numba import njit, types
from numba.cpython.unsafe.numbers import trailing_zeros
from numba.extending import intrinsic

ONE = np.uint64(1)
ZERO = np.uint64(0)


@intrinsic
def _ctpop(typingctx, x):
    if not isinstance(x, types.Integer):
        return None
    sig = types.uint64(types.uint64)

    def codegen(context, builder, signature, args):
        return builder.ctpop(args[0])

    return sig, codegen


@njit(inline="always")
def popcount(x):
    return np.int64(_ctpop(x))


@njit(inline="always")
def ctz(x):
    return np.int64(trailing_zeros(x))


@njit(inline="always")
def test_bit(row, v):
    return (row[v >> 6] >> np.uint64(v & 63)) & ONE != ZERO


@njit(inline="always")
def set_bit(row, v):
    row[v >> 6] |= ONE << np.uint64(v & 63)


@njit(cache=True, nogil=True)
def row_popcounts(rows):
    n, words = rows.shape
    out = np.zeros(n, dtype=np.int64)
    for v in range(n):
        c = 0
        for w in range(words):
            c += popcount(rows[v, w])
        out[v] = c
    return out


@njit(cache=True, nogil=True)
def union_of_rows(rows, verts, out):
    """OR the rows listed in ``verts`` into ``out`` (in place)."""
    words = rows.shape[1]
    for k in range(verts.shape[0]):
        v = verts[k]
        for w in range(words):
            out[w] |= rows[v, w]


@njit(cache=True, nogil=True)
def external_size(rows, verts, xbits):
    """|N(X) minus X| for X given both as a vertex list and as a bitset."""
    words = rows.shape[1]
    acc = np.zeros(words, dtype=np.uint64)
    for k in range(verts.shape[0]):
        v = verts[k]
        for w in range(words):
            acc[w] |= rows[v, w]
    c = 0
    for w in range(words):
        c += popcount(acc[w] & ~xbits[w])
    return c


@njit(cache=True, nogil=True)
def component_labels(rows):
    """Label connected components by bit-parallel BFS; labels follow lowest vertex."""
    n, words = rows.shape
    labels = -np.ones(n, dtype=np.int64)
    unseen = np.zeros(words, dtype=np.uint64)
    for v in range(n):
        set_bit(unseen, v)
    queue = np.empty(n, dtype=np.int64)
    comp = 0
    for s in range(n):
        if labels[s] >= 0:
            continue
        unseen[s >> 6] &= ~(ONE << np.uint64(s & 63))
        labels[s] = comp
        head = 0
        tail = 1
        queue[0] = s
        while head < tail:
            v = queue[head]
            head += 1
            for w in range(words):
                x = rows[v, w] & unseen[w]
                if x == ZERO:
                    continue
                unseen[w] &= ~x
                while x != ZERO:
                    u = w * 64 + ctz(x)
                    labels[u] = comp
                    queue[tail] = u
                    tail += 1
                    x &= x - ONE
        comp += 1
    return labels


@njit(cache=True, nogil=True)
def bits_to_list(row, n):
    out = np.empty(n, dtype=np.int64)
    k = 0
    for w in range(row.shape[0]):
        x = row[w]
        while x != ZERO:
            out[k] = w * 64 + ctz(x)
            k += 1
            x &= x - ONE
    return out[:k]
