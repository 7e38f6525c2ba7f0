"""Undirected simple graphs in CSR form, plus the plain-text edge-list format."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from netmemo.errors import CorruptStreamError, UsageError


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    edges: np.ndarray  # (M, 2) int64, u < v, lexicographically sorted, unique
    indptr: np.ndarray = field(init=False, repr=False)
    indices: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= self.n):
            raise UsageError("edge endpoint out of range")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise UsageError("self-loops are not allowed")
        edges = np.sort(edges, axis=1)
        edges = np.unique(edges, axis=0) if edges.size else edges
        both = np.concatenate([edges, edges[:, ::-1]])
        order = np.lexsort((both[:, 1], both[:, 0]))
        both = both[order]
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(indptr, both[:, 0] + 1, 1)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "indptr", np.cumsum(indptr))
        object.__setattr__(self, "indices", np.ascontiguousarray(both[:, 1]))

    @classmethod
    def from_edges(cls, n: int, pairs) -> Graph:
        return cls(n, np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2))

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    def component_labels(self) -> np.ndarray:
        """Component id per node; ids are ordered by each component's smallest node."""
        if self.n == 0:
            return np.zeros(0, dtype=np.int64)
        adj = csr_matrix(
            (np.ones(self.indices.shape[0], dtype=np.int8), self.indices, self.indptr),
            shape=(self.n, self.n),
        )
        _, labels = connected_components(adj, directed=False)
        return labels.astype(np.int64)

    def induced(self, nodes) -> tuple[Graph, np.ndarray]:
        """Subgraph on `nodes` relabeled 0..k-1 (in ascending original id)."""
        nodes = np.unique(np.asarray(nodes, dtype=np.int64))
        remap = np.full(self.n, -1, dtype=np.int64)
        remap[nodes] = np.arange(nodes.shape[0])
        e = remap[self.edges]
        keep = (e[:, 0] >= 0) & (e[:, 1] >= 0)
        return Graph(int(nodes.shape[0]), e[keep]), nodes


def write_edgelist(path, graph: Graph, *, seed=0, beta=0.0, w_bar=0.0, delta=0.0, weights=None):
    """First line "N M seed beta w_bar delta", then "u v" per edge; optional "node weight" sidecar."""
    with open(path, "w") as fh:
        fh.write(f"{graph.n} {graph.m} {seed} {beta!r} {w_bar!r} {delta!r}\n")
        for u, v in graph.edges:
            fh.write(f"{u} {v}\n")
    if weights is not None:
        with open(f"{path}.weights", "w") as fh:
            for i, w in enumerate(weights):
                fh.write(f"{i} {float(w)!r}\n")


def read_edgelist(path) -> tuple[Graph, dict]:
    with open(path) as fh:
        head = fh.readline().split()
        if len(head) != 6:
            raise CorruptStreamError(f"{path}: bad header line")
        n, m, seed = int(head[0]), int(head[1]), int(head[2])
        meta = {"seed": seed, "beta": float(head[3]), "w_bar": float(head[4]), "delta": float(head[5])}
        pairs = np.loadtxt(fh, dtype=np.int64, ndmin=2) if m else np.zeros((0, 2), dtype=np.int64)
    if pairs.shape != (m, 2):
        raise CorruptStreamError(f"{path}: expected {m} edges, found {pairs.shape[0]}")
    return Graph(n, pairs), meta


def read_weights(path, n: int) -> np.ndarray:
    w = np.zeros(n)
    data = np.loadtxt(path, ndmin=2)
    w[data[:, 0].astype(np.int64)] = data[:, 1]
    return w
