"""Plain-text edge lists: a header ``n m`` followed by ``m`` lines ``u v`` with ``u < v``."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .graph import Graph


class EdgeListError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def parse_edgelist(text: str) -> Graph:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise EdgeListError(1, "missing header 'n m'")
    header = lines[0].split()
    if len(header) != 2:
        raise EdgeListError(1, "header must be 'n m'")
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError:
        raise EdgeListError(1, "header values must be integers") from None
    if n < 1 or m < 0:
        raise EdgeListError(1, f"invalid header n={n} m={m}")
    if len(lines) - 1 != m:
        raise EdgeListError(len(lines), f"header announces {m} edges, found {len(lines) - 1}")
    edges = np.empty((m, 2), dtype=np.int64)
    seen: set[tuple[int, int]] = set()
    for k, line in enumerate(lines[1:]):
        lineno = k + 2
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListError(lineno, f"expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError(lineno, f"non-integer vertex in {line!r}") from None
        if u == v:
            raise EdgeListError(lineno, f"self-loop at vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise EdgeListError(lineno, f"vertex out of range 0..{n - 1}: {u} {v}")
        if u > v:
            raise EdgeListError(lineno, f"edge must be written with u < v: {u} {v}")
        if (u, v) in seen:
            raise EdgeListError(lineno, f"duplicate edge {u} {v}")
        seen.add((u, v))
        edges[k] = u, v
    return Graph(n).add_edges(edges)


def read_edgelist(path) -> Graph:
    return parse_edgelist(Path(path).read_text(encoding="utf-8"))


def format_edgelist(n: int, edges: np.ndarray) -> str:
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    e = np.sort(e, axis=1)
    e = e[np.lexsort((e[:, 1], e[:, 0]))]
    buf = io.StringIO()
    buf.write(f"{n} {len(e)}\n")
    for u, v in e:
        buf.write(f"{u} {v}\n")
    return buf.getvalue()


def write_edgelist(path, G: Graph, edges: np.ndarray | None = None) -> None:
    """Write ``G`` (or an explicit edge array on ``G.n`` vertices) to ``path``."""
    if edges is None:
        edges = G.edges()
    Path(path).write_text(format_edgelist(G.n, edges), encoding="utf-8", newline="\n")
