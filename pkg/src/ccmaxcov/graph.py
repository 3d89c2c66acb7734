"""Undirected graphs in CSR form, file loaders and the coverage objective."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from ._kernels import coverage_kernel


class GraphFormatError(ValueError):
    """Malformed graph file."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph.

    Neighbours of node ``i`` are ``indices[indptr[i]:indptr[i + 1]]``, sorted
    ascending. Both arrays are read-only.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    _closed: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def m(self) -> int:
        return int(self.indices.shape[0] // 2)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    @property
    def adjacency(self) -> list[np.ndarray]:
        return [self.neighbors(i) for i in range(self.n)]

    def edges(self) -> np.ndarray:
        """(m, 2) array of edges with u < v, lexicographically sorted."""
        rows = np.repeat(np.arange(self.n), self.degrees)
        keep = rows < self.indices
        return np.column_stack([rows[keep], self.indices[keep]])

    def closed_neighborhood_matrix(self) -> np.ndarray:
        """Dense boolean matrix with ``A[i, j]`` true iff ``j`` is ``i`` or a neighbour."""
        if self._closed is None:
            a = np.zeros((self.n, self.n), dtype=bool)
            rows = np.repeat(np.arange(self.n), self.degrees)
            a[rows, self.indices] = True
            a[np.arange(self.n), np.arange(self.n)] = True
            a.flags.writeable = False
            object.__setattr__(self, "_closed", a)
        return self._closed

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def __hash__(self):
        return hash((self.n, self.indices.tobytes()))


def from_edges(n: int, edges: Iterable[tuple[int, int]] | np.ndarray) -> Graph:
    """Build a graph on nodes ``0..n-1``; self-loops and duplicates are dropped."""
    if n < 0:
        raise ValueError(f"node count must be non-negative, got {n}")
    e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    e = e.reshape(-1, 2)
    if e.size and (e.min() < 0 or e.max() >= n):
        raise IndexError(f"edge endpoint outside 0..{n - 1}")
    e = e[e[:, 0] != e[:, 1]]
    both = np.concatenate([e, e[:, ::-1]])
    if both.size:
        both = np.unique(both, axis=0)
    counts = np.bincount(both[:, 0], minlength=n) if both.size else np.zeros(n, np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = np.ascontiguousarray(both[:, 1], dtype=np.int64)
    indptr.flags.writeable = False
    indices.flags.writeable = False
    return Graph(n=n, indptr=indptr, indices=indices)


def _data_lines(stream: TextIO, comments: str):
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line[0] in comments:
            continue
        yield lineno, line.split()


def _parse_int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise GraphFormatError(f"line {lineno}: expected an integer, got {tok!r}") from None


def load_edge_list(stream: TextIO, index_base: int = 0) -> Graph:
    """Read whitespace-separated integer pairs; ``#`` and ``%`` start comments."""
    if index_base not in (0, 1):
        raise ValueError("index_base must be 0 or 1")
    edges = []
    top = -1
    for lineno, toks in _data_lines(stream, "#%"):
        if len(toks) < 2:
            raise GraphFormatError(f"line {lineno}: expected two node indices")
        u = _parse_int(toks[0], lineno) - index_base
        v = _parse_int(toks[1], lineno) - index_base
        if u < 0 or v < 0:
            raise IndexError(f"line {lineno}: negative node index after base shift")
        top = max(top, u, v)
        edges.append((u, v))
    return from_edges(top + 1, edges)


def load_matrix_market(stream: TextIO) -> Graph:
    """Read a coordinate MatrixMarket file as an undirected graph; weights are ignored."""
    header = None
    edges = []
    for lineno, toks in _data_lines(stream, "%"):
        if header is None:
            if len(toks) < 3:
                raise GraphFormatError(f"line {lineno}: expected size header 'rows cols nnz'")
            rows, cols = _parse_int(toks[0], lineno), _parse_int(toks[1], lineno)
            if rows != cols:
                raise GraphFormatError(f"non-square matrix {rows}x{cols} cannot be an adjacency matrix")
            header = rows
            continue
        if len(toks) < 2:
            raise GraphFormatError(f"line {lineno}: expected 'i j [weight]'")
        u = _parse_int(toks[0], lineno) - 1
        v = _parse_int(toks[1], lineno) - 1
        if not (0 <= u < header and 0 <= v < header):
            raise IndexError(f"line {lineno}: entry ({u + 1}, {v + 1}) outside {header}x{header}")
        edges.append((u, v))
    if header is None:
        raise GraphFormatError("missing MatrixMarket size header")
    return from_edges(header, edges)


def load_graph(path, fmt: str | None = None, index_base: int = 0) -> Graph:
    """Load a graph file; ``fmt`` is ``"edgelist"`` or ``"mtx"`` (guessed from suffix if None)."""
    path = str(path)
    if fmt is None:
        fmt = "mtx" if path.endswith(".mtx") else "edgelist"
    with open(path, encoding="utf-8") as fh:
        if fmt == "mtx":
            return load_matrix_market(fh)
        if fmt == "edgelist":
            return load_edge_list(fh, index_base)
    raise ValueError(f"unknown graph format {fmt!r}")


def write_edge_list(g: Graph, stream: TextIO) -> None:
    stream.write(f"# n={g.n} m={g.m}\n")
    for u, v in g.edges():
        stream.write(f"{u} {v}\n")


def gen_random_graph(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, p): every unordered pair is an edge with probability p."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.shape[0]) < p
    return from_edges(n, np.column_stack([iu[keep], ju[keep]]))


def coverage(g: Graph, x) -> int:
    """Number of nodes that are selected or adjacent to a selected node."""
    x = np.asarray(x)
    if x.shape != (g.n,):
        raise ValueError(f"solution length {x.shape} does not match n={g.n}")
    return int(coverage_kernel(g.indptr, g.indices, x.astype(np.uint8, copy=False)))
