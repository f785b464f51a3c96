"""Training-pair generation: neighborhood pair sampling and biased random walks.

Two ways to produce SkipGram training pairs from a graph:

* pair sampling (``ps``): for each center, take every first-order neighbor
  and grow at most one next-order successor per sampled node, emitting one
  (center, neighbor) pair per selected node. Bounds the pair count by
  2 * reps * order * |E|.
* random walks (``rw``): second-order biased walks (return parameter ``p``,
  in-out parameter ``q``; ``p = q = 1`` reduces to uniform first-order
  walks), with window co-occurrence pairs extracted afterwards.

Also computes the empirical walk diagnostics (per-node visit ratios and
neighbor co-occurrence distributions) and the closed-form pair-count ratio
between the two strategies.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graph import Graph, bfs_distances
from .seeds import worker_rng


@dataclass
class PairSet:
    """Multiset of ordered (center, neighbor) training pairs.

    centers/neighbors are parallel int32 arrays; ``provenance`` records the
    generating strategy ("ps" or "rw"). ``dropped_self_pairs`` counts window
    pairs discarded because a walk revisited its center.
    """
    centers: np.ndarray
    neighbors: np.ndarray
    provenance: str
    dropped_self_pairs: int = 0

    def __len__(self) -> int:
        return len(self.centers)

    def __iter__(self):
        return zip(self.centers.tolist(), self.neighbors.tolist())


@dataclass
class SamplingStats:
    """Empirical walk diagnostics.

    alpha[i] = (windows centered at i inside walks that did not start at i)
    divided by the per-node walk count; beta[i] maps co-occurring node j to
    its share of all windows centered at i (self co-occurrences from walk
    revisits included - they are exactly the redundant samples a direct
    pair sampler avoids).
    """
    walks_per_node: int
    foreign_windows: np.ndarray
    alpha: np.ndarray
    beta: dict[int, dict[int, float]]
    self_windows: int = 0


def sample_neighborhood(g: Graph, center: int, max_order: int,
                        rng: np.random.Generator) -> list[tuple[int, int]]:
    """One repetition of pair sampling around ``center``.

    All first-order neighbors are selected. Then, for each order o < max_order,
    every node selected at order o samples uniformly at most one order-(o+1)
    node from its neighbors that (a) sit at exact distance o+1 from the center
    and (b) were not already selected in this repetition. Dead ends simply stop.

    Returns one (center, neighbor) pair per selected node.
    """
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    first = g.neighbors(center)
    if len(first) == 0:
        return []
    dist = bfs_distances(g, center, max_order)
    selected = set(int(v) for v in first)
    frontier = [int(v) for v in first]
    pairs = [(center, v) for v in frontier]
    for order in range(1, max_order):
        next_frontier = []
        for node in frontier:
            candidates = [int(x) for x in g.neighbors(node)
                          if dist.get(int(x)) == order + 1 and int(x) not in selected]
            if not candidates:
                continue
            chosen = candidates[int(rng.integers(len(candidates)))]
            selected.add(chosen)
            next_frontier.append(chosen)
            pairs.append((center, chosen))
        frontier = next_frontier
    return pairs


def _sample_pairs_chunk(g: Graph, centers, max_order: int, reps: int, rng) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    for _ in range(reps):
        for c in centers:
            out.extend(sample_neighborhood(g, c, max_order, rng))
    return out


def sample_pairs(g: Graph, max_order: int, reps: int, seed: int,
                 threads: int = 1) -> PairSet:
    """Pair-sample the whole graph: ``reps`` repetitions over every center.

    The result size is bounded by 2 * reps * max_order * |E|. Single-threaded
    runs are bit-reproducible for a fixed seed; with ``threads > 1`` centers
    are partitioned across workers with independent streams (same invariants,
    different multiset).
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    all_centers = range(g.node_count)
    if threads <= 1:
        rng = np.random.default_rng(seed)
        pairs = _sample_pairs_chunk(g, all_centers, max_order, reps, rng)
    else:
        chunks = np.array_split(np.arange(g.node_count), threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = [pool.submit(_sample_pairs_chunk, g, chunk.tolist(), max_order, reps,
                                worker_rng(seed, "sample-ps", w))
                    for w, chunk in enumerate(chunks)]
            pairs = [p for f in futs for p in f.result()]
    if pairs:
        arr = np.array(pairs, dtype=np.int32)
        return PairSet(arr[:, 0].copy(), arr[:, 1].copy(), provenance="ps")
    return PairSet(np.empty(0, np.int32), np.empty(0, np.int32), provenance="ps")


def random_walk(g: Graph, start: int, length: int, p: float, q: float,
                rng: np.random.Generator) -> list[int]:
    """One biased random walk of ``length`` nodes starting at ``start``.

    The first step is uniform over neighbors; later steps weight each
    candidate x by 1/p when x is the previous node, 1 when x is adjacent to
    it, and 1/q otherwise. An isolated start yields the single-node walk.
    """
    if not (0 <= start < g.node_count):
        raise ValueError(f"invalid start node {start}")
    if length < 1:
        raise ValueError("walk length must be >= 1")
    if p <= 0 or q <= 0:
        raise ValueError("p and q must be positive")
    walk = [start]
    if length == 1 or g.degree(start) == 0:
        return walk
    uniform = p == 1.0 and q == 1.0
    nbrs = g.neighbors(start)
    walk.append(int(nbrs[int(rng.integers(len(nbrs)))]))
    while len(walk) < length:
        cur = walk[-1]
        prev = walk[-2]
        nbrs = g.neighbors(cur)
        if uniform:
            walk.append(int(nbrs[int(rng.integers(len(nbrs)))]))
            continue
        prev_nbrs = g.neighbors(prev)
        weights = np.empty(len(nbrs), dtype=np.float64)
        for idx, x in enumerate(nbrs):
            if x == prev:
                weights[idx] = 1.0 / p
            else:
                pos = int(np.searchsorted(prev_nbrs, x))
                if pos < len(prev_nbrs) and prev_nbrs[pos] == x:
                    weights[idx] = 1.0
                else:
                    weights[idx] = 1.0 / q
        cum = np.cumsum(weights)
        draw = rng.random() * cum[-1]
        walk.append(int(nbrs[int(np.searchsorted(cum, draw, side="right"))]))
    return walk


def _walks_chunk(g, starts, length, walks_per_node, p, q, rng):
    out = []
    for _ in range(walks_per_node):
        for s in starts:
            out.append(random_walk(g, s, length, p, q, rng))
    return out


def random_walks(g: Graph, length: int, walks_per_node: int, p: float, q: float,
                 seed: int, threads: int = 1) -> list[list[int]]:
    """``walks_per_node`` walks from every non-isolated node.

    Isolated nodes are skipped (they yield no pairs). Walk order is
    deterministic for a fixed seed in single-threaded mode.
    """
    starts = [v for v in range(g.node_count) if g.degree(v) > 0]
    if threads <= 1:
        rng = np.random.default_rng(seed)
        return _walks_chunk(g, starts, length, walks_per_node, p, q, rng)
    chunks = np.array_split(np.array(starts), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futs = [pool.submit(_walks_chunk, g, chunk.tolist(), length, walks_per_node, p, q,
                            worker_rng(seed, "sample-rw", w))
                for w, chunk in enumerate(chunks)]
        return [wlk for f in futs for wlk in f.result()]


def extract_window_pairs(walks: list[list[int]], window: int) -> PairSet:
    """Ordered co-occurrence pairs within +-``window`` positions of each walk node.

    Pairs whose two sides coincide (a walk revisiting the center inside its
    own window) are dropped from the output and counted, since they carry no
    structural signal for training.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    centers: list[np.ndarray] = []
    neighbors: list[np.ndarray] = []
    dropped = 0
    by_len: dict[int, list[list[int]]] = {}
    for w in walks:
        by_len.setdefault(len(w), []).append(w)
    for length, group in sorted(by_len.items()):
        arr = np.array(group, dtype=np.int32)
        for delta in range(1, min(window, length - 1) + 1):
            left = arr[:, :-delta].ravel()
            right = arr[:, delta:].ravel()
            keep = left != right
            dropped += 2 * int((~keep).sum())
            centers.append(left[keep])
            neighbors.append(right[keep])
            centers.append(right[keep])
            neighbors.append(left[keep])
    if centers:
        c = np.concatenate(centers)
        n = np.concatenate(neighbors)
    else:
        c = np.empty(0, np.int32)
        n = np.empty(0, np.int32)
    return PairSet(c, n, provenance="rw", dropped_self_pairs=dropped)


def sampling_stats(walks: list[list[int]], window: int, walks_per_node: int,
                   n_nodes: int | None = None) -> SamplingStats:
    """Empirical visit ratios and neighbor distributions from a walk corpus.

    alpha[i] = T_i / T where T_i counts windows centered at i in walks not
    started at i and T is the per-node walk count. beta[i][j] is the share
    of node j among all window co-occurrences with center i (including
    revisit self co-occurrences, reported separately as ``self_windows``).
    """
    if not walks:
        raise ValueError("walks must be nonempty")
    if n_nodes is None:
        n_nodes = 1 + max(max(w) for w in walks)
    foreign = np.zeros(n_nodes, dtype=np.int64)
    cooc: dict[int, Counter] = {}
    self_windows = 0
    for walk in walks:
        start = walk[0]
        length = len(walk)
        for pos, center in enumerate(walk):
            if center != start:
                foreign[center] += 1
            ctr = cooc.setdefault(center, Counter())
            lo = max(0, pos - window)
            hi = min(length, pos + window + 1)
            for j in range(lo, hi):
                if j == pos:
                    continue
                other = walk[j]
                if other == center:
                    self_windows += 1
                ctr[other] += 1
    alpha = foreign / float(walks_per_node)
    beta = {}
    for center, ctr in cooc.items():
        total = sum(ctr.values())
        if total > 0:
            beta[center] = {j: cnt / total for j, cnt in ctr.items()}
    return SamplingStats(walks_per_node=walks_per_node, foreign_windows=foreign,
                         alpha=alpha, beta=beta, self_windows=self_windows)


def sample_ratio(walk_len: int, window: int, walks_per_node: int,
                 reps: int, max_order: int, avg_degree: float) -> float:
    """Closed-form ratio of walk-window pair volume to direct pair-sample volume.

    Walk extraction yields window*(2*walk_len - window - 1) pairs per
    revisit-free walk, while direct sampling is bounded by
    reps * max_order * avg_degree pairs per node; the ratio of the two is
    independent of |V|.
    """
    for name, val in [("walk_len", walk_len), ("window", window),
                      ("walks_per_node", walks_per_node), ("reps", reps),
                      ("max_order", max_order), ("avg_degree", avg_degree)]:
        if val <= 0:
            raise ValueError(f"{name} must be positive, got {val}")
    if 2 * walk_len - window - 1 <= 0:
        raise ValueError("window too large for walk length: 2L - W - 1 must be positive")
    return (2 * walk_len - window - 1) * window * walks_per_node / (reps * max_order * avg_degree)


# -- pair / walk file formats ---------------------------------------------

def write_pairs(pairs: PairSet, g: Graph, path) -> None:
    """Write pairs as ``center<TAB>neighbor`` external-id lines."""
    ids = g.id_list
    with open(path, "w", encoding="utf-8") as fh:
        for c, n in zip(pairs.centers.tolist(), pairs.neighbors.tolist()):
            fh.write(f"{ids[c]}\t{ids[n]}\n")


def read_pairs(path, g: Graph, provenance: str = "ps") -> PairSet:
    """Read a pairs file back into dense indices under ``g``'s id map."""
    centers = []
    neighbors = []
    id_map = g.id_map
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            toks = stripped.split("\t")
            if len(toks) != 2:
                raise ValueError(f"{path}:{lineno}: expected center<TAB>neighbor")
            try:
                centers.append(id_map[toks[0]])
                neighbors.append(id_map[toks[1]])
            except KeyError as exc:
                raise ValueError(f"{path}:{lineno}: unknown node id {exc.args[0]!r}") from None
    return PairSet(np.array(centers, dtype=np.int32), np.array(neighbors, dtype=np.int32),
                   provenance=provenance)


def write_walks(walks: list[list[int]], g: Graph, path) -> None:
    """Debug output: one walk per line, space-separated external ids."""
    ids = g.id_list
    with open(path, "w", encoding="utf-8") as fh:
        for walk in walks:
            fh.write(" ".join(ids[v] for v in walk) + "\n")
