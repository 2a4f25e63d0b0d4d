"""Undirected simple graphs in CSR form, plus generators and BFS measurements."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from oversmooth._karate import KARATE_EDGES

__all__ = [
    "Graph",
    "GraphError",
    "GeneratorSpec",
    "ComponentPartition",
    "from_edges",
    "load_edge_list",
    "generate",
    "parse_generator",
    "diameter",
    "connected_components",
    "degree_stats",
    "is_connected",
]


class GraphError(ValueError):
    """Raised for malformed graph input or an operation undefined on the graph."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph.

    Attributes
    ----------
    n : int
        Number of nodes; ids are ``0..n-1``.
    indptr, indices : ndarray
        CSR adjacency; neighbors of ``u`` are ``indices[indptr[u]:indptr[u+1]]``,
        sorted ascending. Both directions of every edge are stored.
    edges : ndarray, shape (E, 2)
        Each undirected edge once as ``(u, v)`` with ``u < v``, lexicographically sorted.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    edges: np.ndarray
    name: str = field(default="graph", compare=False)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    def dense_adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        if self.edge_count:
            a[self.edges[:, 0], self.edges[:, 1]] = 1.0
            a[self.edges[:, 1], self.edges[:, 0]] = 1.0
        return a

    def same_edges(self, other: Graph) -> bool:
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    def __repr__(self) -> str:
        return f"Graph(name={self.name!r}, n={self.n}, edges={self.edge_count})"


def from_edges(n: int, pairs: Iterable[tuple[int, int]], name: str = "graph") -> Graph:
    """Build a :class:`Graph` from unordered node pairs.

    Duplicates (in either orientation) are merged. Self-loops raise
    :class:`GraphError`: the augmented operators add exactly one loop per node
    themselves, so a user-supplied loop would be counted twice.
    """
    if n < 1:
        raise GraphError("graph must have at least one node")
    arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
    if arr.size:
        if arr.min() < 0 or arr.max() >= n:
            raise GraphError(f"node id out of range for n={n}")
        loops = arr[:, 0] == arr[:, 1]
        if loops.any():
            raise GraphError(f"self-loop on node {int(arr[loops][0, 0])} is not supported")
        arr = np.sort(arr, axis=1)
        arr = np.unique(arr, axis=0)
    both = np.concatenate([arr, arr[:, ::-1]]) if arr.size else arr
    order = np.lexsort((both[:, 1], both[:, 0])) if both.size else np.array([], dtype=np.int64)
    both = both[order]
    counts = np.bincount(both[:, 0], minlength=n) if both.size else np.zeros(n, dtype=np.int64)
    indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    indices = both[:, 1].astype(np.int64) if both.size else np.zeros(0, dtype=np.int64)
    for a in (indptr, indices, arr):
        a.setflags(write=False)
    return Graph(n=n, indptr=indptr, indices=indices, edges=arr, name=name)


def load_edge_list(text: str, name: str = "edges") -> Graph:
    """Parse whitespace-separated integer pairs; ``#`` starts a comment line.

    The node count is ``1 + max id``.

    >>> load_edge_list("0 1\\n1 2").degrees.tolist()
    [1, 2, 1]
    """
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected two node ids, got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphError(f"line {lineno}: node ids must be integers, got {raw!r}") from None
        if u < 0 or v < 0:
            raise GraphError(f"line {lineno}: node ids must be non-negative")
        if u == v:
            raise GraphError(f"line {lineno}: self-loop on node {u} is not supported")
        pairs.append((u, v))
    if not pairs:
        raise GraphError("empty edge list")
    n = 1 + max(max(p) for p in pairs)
    return from_edges(n, pairs, name=name)


# ----------------------------------------------------------------------------
# generators
# ----------------------------------------------------------------------------

_ARITY = {"er": 2, "ws": 3, "star": 1, "path": 1, "cycle": 1, "complete": 1, "karate": 0}


@dataclass(frozen=True)
class GeneratorSpec:
    """A named generator with its parameters, e.g. ``GeneratorSpec("er", (50, 0.2), seed=7)``."""

    variant: str
    params: tuple = ()
    seed: int = 0

    def __post_init__(self) -> None:
        v = self.variant
        if v not in _ARITY:
            raise GraphError(f"unknown generator {v!r}; expected one of {sorted(_ARITY)}")
        if len(self.params) != _ARITY[v]:
            raise GraphError(f"{v} takes {_ARITY[v]} parameter(s), got {len(self.params)}")
        if not 0 <= self.seed < 2**64:
            raise GraphError("seed must be a 64-bit unsigned integer")
        if v == "karate":
            return
        n = self.params[0]
        if int(n) != n or n < 1:
            raise GraphError("n must be a positive integer")
        if v == "er" and not 0.0 <= self.params[1] <= 1.0:
            raise GraphError("p must lie in [0, 1]")
        if v == "ws":
            k, beta = self.params[1], self.params[2]
            if int(k) != k or k % 2 or not 0 <= k < n:
                raise GraphError("Watts-Strogatz k must be even with 0 <= k < n")
            if not 0.0 <= beta <= 1.0:
                raise GraphError("beta must lie in [0, 1]")
        if v == "cycle" and n < 3:
            raise GraphError("cycle needs n >= 3")

    @property
    def label(self) -> str:
        if not self.params:
            return self.variant
        return f"{self.variant}:" + ",".join(str(p) for p in self.params)


def parse_generator(text: str, seed: int = 0) -> GeneratorSpec:
    """Parse the ``name:param,param`` mini-grammar (``er:50,0.2``, ``karate``)."""
    name, _, rest = text.strip().partition(":")
    name = name.lower()
    raw = [p for p in rest.split(",") if p.strip()] if rest else []
    params: list[int | float] = []
    for i, p in enumerate(raw):
        p = p.strip()
        # probability-like slots are floats, everything else integral
        is_float = (name == "er" and i == 1) or (name == "ws" and i == 2)
        try:
            params.append(float(p) if is_float else int(p))
        except ValueError:
            raise GraphError(f"bad parameter {p!r} in generator spec {text!r}") from None
    return GeneratorSpec(name, tuple(params), seed)


def generate(spec: GeneratorSpec) -> Graph:
    v, p = spec.variant, spec.params
    if v == "karate":
        return from_edges(34, KARATE_EDGES, name="karate")
    n = int(p[0])
    if v == "path":
        pairs = [(i, i + 1) for i in range(n - 1)]
    elif v == "cycle":
        pairs = [(i, (i + 1) % n) for i in range(n)]
    elif v == "star":
        pairs = [(0, i) for i in range(1, n)]
    elif v == "complete":
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    elif v == "er":
        pairs = _erdos_renyi(n, float(p[1]), spec.seed)
    else:
        pairs = _watts_strogatz(n, int(p[1]), float(p[2]), spec.seed)
    return from_edges(n, pairs, name=spec.label)


def _erdos_renyi(n: int, p: float, seed: int) -> list[tuple[int, int]]:
    # one coin per unordered pair, pairs in (i, j) lexicographic order
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return list(zip(iu[keep].tolist(), ju[keep].tolist()))


def _watts_strogatz(n: int, k: int, beta: float, seed: int) -> list[tuple[int, int]]:
    rng = np.random.default_rng(seed)
    adj: list[set[int]] = [set() for _ in range(n)]
    for u in range(n):
        for j in range(1, k // 2 + 1):
            v = (u + j) % n
            adj[u].add(v)
            adj[v].add(u)
    for j in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + j) % n
            if rng.random() >= beta or v not in adj[u]:
                continue
            if len(adj[u]) >= n - 1:
                continue
            while True:
                w = int(rng.integers(n))
                if w != u and w not in adj[u]:
                    break
            adj[u].discard(v)
            adj[v].discard(u)
            adj[u].add(w)
            adj[w].add(u)
    return [(u, v) for u in range(n) for v in sorted(adj[u]) if u < v]


# ----------------------------------------------------------------------------
# BFS measurements
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ComponentPartition:
    component_id: np.ndarray
    component_count: int

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.component_id == c)


def _bfs(g: Graph, source: int) -> np.ndarray:
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.neighbors(u):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def connected_components(g: Graph) -> ComponentPartition:
    """Label components by BFS; labels are numbered in order of their smallest node."""
    labels = np.full(g.n, -1, dtype=np.int64)
    count = 0
    for s in range(g.n):
        if labels[s] >= 0:
            continue
        labels[_bfs(g, s) >= 0] = count
        count += 1
    labels.setflags(write=False)
    return ComponentPartition(labels, count)


def is_connected(g: Graph) -> bool:
    return bool((_bfs(g, 0) >= 0).all())


def diameter(g: Graph) -> int:
    """Longest shortest-path length, by BFS from every node.

    Raises
    ------
    GraphError
        If ``g`` is disconnected (the diameter is infinite).
    """
    best = 0
    for s in range(g.n):
        dist = _bfs(g, s)
        if (dist < 0).any():
            raise GraphError("diameter is undefined for a disconnected graph")
        best = max(best, int(dist.max()))
    return best


def degree_stats(g: Graph) -> tuple[int, list[int]]:
    """Return ``(d_max, histogram)`` where ``histogram[d]`` counts nodes of degree ``d``."""
    deg = g.degrees
    d_max = int(deg.max()) if g.n else 0
    return d_max, np.bincount(deg, minlength=d_max + 1).tolist()
