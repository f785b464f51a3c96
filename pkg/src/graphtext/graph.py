"""Undirected, unweighted graph with dense node indices and file ingestion.

Nodes carry arbitrary external string ids; dense indices are assigned in
first-appearance order so that loading the same file always produces the
same indexing. Directed input edges are symmetrized, duplicates and
self-loops are dropped. Graphs are immutable after construction and safe
for concurrent reads.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np


class EdgeListFormatError(ValueError):
    """Raised for a malformed edge-list line (message carries the line number)."""


class Graph:
    """Undirected unweighted graph over dense node indices.

    Attributes:
        node_count: number of nodes.
        edge_count: number of undirected edges.
        adjacency: per-node sorted int32 array of neighbor indices.
        id_list: external id for each dense index.
        id_map: external id -> dense index.
        dropped_self_loops: self-loop input lines dropped during construction.
    """

    def __init__(self, id_list: list[str], edges: Iterable[tuple[int, int]],
                 dropped_self_loops: int = 0):
        self.id_list = list(id_list)
        self.id_map = {tok: i for i, tok in enumerate(self.id_list)}
        if len(self.id_map) != len(self.id_list):
            raise ValueError("duplicate external node ids")
        self.node_count = len(self.id_list)
        self.dropped_self_loops = dropped_self_loops

        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise ValueError(f"edge ({u}, {v}) references an unknown node index")
            if u == v:
                continue
            seen.add((u, v) if u < v else (v, u))

        buckets: list[list[int]] = [[] for _ in range(self.node_count)]
        for u, v in seen:
            buckets[u].append(v)
            buckets[v].append(u)
        self.adjacency = [np.array(sorted(b), dtype=np.int32) for b in buckets]
        self.edge_count = len(seen)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_token_edges(cls, token_pairs: Iterable[tuple[str, str]],
                         declared: Iterable[str] = ()) -> "Graph":
        """Build a graph from (id, id) pairs, assigning indices in first-appearance order.

        ``declared`` ids are registered first (in order) so a file can carry
        nodes that have no edges; re-declaring an id is a no-op.
        """
        id_list: list[str] = []
        id_map: dict[str, int] = {}
        edges = []
        self_loops = 0
        for tok in declared:
            if tok not in id_map:
                id_map[tok] = len(id_list)
                id_list.append(tok)
        for a, b in token_pairs:
            for tok in (a, b):
                if tok not in id_map:
                    id_map[tok] = len(id_list)
                    id_list.append(tok)
            if a == b:
                self_loops += 1
                continue
            edges.append((id_map[a], id_map[b]))
        return cls(id_list, edges, dropped_self_loops=self_loops)

    # -- queries -----------------------------------------------------------

    def neighbors(self, node: int) -> np.ndarray:
        return self.adjacency[node]

    def degree(self, node: int) -> int:
        return len(self.adjacency[node])

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.adjacency[u]
        pos = int(np.searchsorted(nbrs, v))
        return pos < len(nbrs) and nbrs[pos] == v

    def edges(self) -> Iterator[tuple[int, int]]:
        """Iterate undirected edges as (u, v) with u < v, in index order."""
        for u in range(self.node_count):
            for v in self.adjacency[u]:
                if u < v:
                    yield u, int(v)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        if set(self.id_list) != set(other.id_list):
            return False
        mine = {(self.id_list[u], self.id_list[v]) for u, v in self.edges()}
        mine |= {(b, a) for a, b in mine}
        theirs = {(other.id_list[u], other.id_list[v]) for u, v in other.edges()}
        theirs |= {(b, a) for a, b in theirs}
        return mine == theirs

    def __repr__(self) -> str:
        return f"Graph(|V|={self.node_count}, |E|={self.edge_count})"


@dataclass
class EdgeSplit:
    """Result of holding out a random fraction of edges.

    The training graph keeps every node (possibly isolated); held-out edges
    are disjoint from training edges and together they restore the original
    edge set.
    """
    train_graph: Graph
    held_out: list[tuple[int, int]]
    keep_fraction: float
    seed: int


def load_edge_list(path) -> Graph:
    """Load an undirected graph from an edge-list file.

    One edge per line: two whitespace-separated tokens. Blank lines and
    comments (``#``) are ignored, except ``# node <id>`` lines, which declare
    a node without edges — splits use these to keep nodes that lost all their
    edges. Duplicate edges (either orientation) are collapsed; self-loops are
    dropped and counted on the returned graph.

    Raises:
        OSError: unreadable file.
        EdgeListFormatError: a non-comment line with fewer than two tokens.
    """
    pairs = []
    declared = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                toks = stripped[1:].split()
                if len(toks) == 2 and toks[0] == "node":
                    declared.append(toks[1])
                continue
            toks = stripped.split()
            if len(toks) < 2:
                raise EdgeListFormatError(f"{path}:{lineno}: expected two tokens, got {stripped!r}")
            pairs.append((toks[0], toks[1]))
    return Graph.from_token_edges(pairs, declared=declared)


def write_edge_list(g: Graph, path, edges: Iterable[tuple[int, int]] | None = None,
                    declare_nodes: bool = False) -> None:
    """Write edges (default: all of ``g``) as external-id pairs, one per line.

    With ``declare_nodes`` the file starts with one ``# node <id>`` line per
    node in index order, so loading it reproduces the exact node universe and
    indexing even when some nodes have no edges.
    """
    if edges is None:
        edges = g.edges()
    with open(path, "w", encoding="utf-8") as fh:
        if declare_nodes:
            for node_id in g.id_list:
                fh.write(f"# node {node_id}\n")
        for u, v in edges:
            fh.write(f"{g.id_list[u]} {g.id_list[v]}\n")


def split_edges(g: Graph, keep_fraction: float, seed: int) -> EdgeSplit:
    """Keep all nodes and a uniformly random ``keep_fraction`` of edges.

    The number of kept edges is round-half-up(keep_fraction * |E|). The
    training graph preserves the full node universe and the original id
    indexing, so indices remain comparable across the split.
    """
    if not (0.0 < keep_fraction <= 1.0):
        raise ValueError(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    all_edges = list(g.edges())
    n_keep = int(np.floor(keep_fraction * len(all_edges) + 0.5))
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(all_edges))
    kept_idx = np.sort(order[:n_keep])
    held_idx = np.sort(order[n_keep:])
    kept = [all_edges[i] for i in kept_idx]
    held = [all_edges[i] for i in held_idx]
    train = Graph(g.id_list, kept)
    return EdgeSplit(train_graph=train, held_out=held, keep_fraction=keep_fraction, seed=seed)


def bfs_distances(g: Graph, source: int, max_depth: int) -> dict[int, int]:
    """Exact shortest-path distances from ``source``, truncated at ``max_depth``.

    Returns a map containing exactly the nodes at distance <= max_depth.
    """
    if not (0 <= source < g.node_count):
        raise ValueError(f"invalid node index {source}")
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    dist = {source: 0}
    frontier = deque([source])
    while frontier:
        u = frontier.popleft()
        d = dist[u]
        if d == max_depth:
            continue
        for v in g.adjacency[u]:
            v = int(v)
            if v not in dist:
                dist[v] = d + 1
                frontier.append(v)
    return dist


def degree_stats(g: Graph) -> tuple[int, int, float]:
    """Return (|V|, |E|, average degree 2|E|/|V|)."""
    if g.node_count == 0:
        raise ValueError("degree_stats of an empty graph")
    return g.node_count, g.edge_count, 2.0 * g.edge_count / g.node_count
