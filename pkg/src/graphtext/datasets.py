"""Deterministic synthetic benchmark graphs.

Two generators used by the test and acceptance suites:

* ``citation_graph`` — a community-structured graph at citation-network scale
  (2,211 nodes / 5,214 edges): ~370 small dense communities, each a
  triangle-rich circulant (ring plus distance-2 chords) filled in to ~90%
  density so every node keeps redundant short paths to its neighbors, and a
  small number of cross-community edges bundled into parallel bridges.
* ``keyword_graph`` — 1,000 nodes in 20 groups of 50; every edge joins two
  nodes of the same group, and each node's text contains its group's keyword.
  The keywords are anagrams of each other sharing first and last letter, so
  models that read only character content (not word identity) have little to
  key on.

Both are pure functions of their seed.
"""

from __future__ import annotations

import itertools

import numpy as np

from .graph import Graph

FILLER_WORDS = [
    "analysis", "approach", "baseline", "cluster", "dataset", "design",
    "feature", "gradient", "kernel", "layout", "metric", "model",
    "network", "node", "pattern", "pipeline", "protocol", "report",
    "result", "sample", "signal", "survey", "system", "vector",
]


def _ring_and_extra_edges(sizes, extra_intra: int, n_inter: int, rng,
                          chord_span: int = 1):
    """Edge list over communities: a circulant per community (each node joined
    to its next ``chord_span`` ring positions; span 1 is a plain ring, span 2
    adds distance-2 chords and puts every base edge in a triangle),
    ``extra_intra`` additional within-community edges, ``n_inter``
    cross-community edges."""
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    labels = np.concatenate([np.full(s, c, dtype=np.int64)
                             for c, s in enumerate(sizes)])
    chosen: set[tuple[int, int]] = set()
    edge_list: list[tuple[int, int]] = []

    for c, size in enumerate(sizes):
        base = int(offsets[c])
        for j in range(size):
            for span in range(1, chord_span + 1):
                u, v = base + j, base + (j + span) % size
                pair = (min(u, v), max(u, v))
                if u != v and pair not in chosen:
                    chosen.add(pair)
                    edge_list.append(pair)

    candidates = []
    for c, size in enumerate(sizes):
        base = int(offsets[c])
        for i in range(size):
            for j in range(i + 1, size):
                pair = (base + i, base + j)
                if pair not in chosen:
                    candidates.append(pair)
    if extra_intra > len(candidates):
        raise ValueError(f"cannot place {extra_intra} extra edges in {len(candidates)} slots")
    picked = rng.choice(len(candidates), size=extra_intra, replace=False)
    for idx in sorted(int(i) for i in picked):
        chosen.add(candidates[idx])
        edge_list.append(candidates[idx])

    n_nodes = int(offsets[-1])
    placed = 0
    while placed < n_inter:
        u = int(rng.integers(n_nodes))
        v = int(rng.integers(n_nodes))
        if labels[u] == labels[v]:
            continue
        pair = (min(u, v), max(u, v))
        if pair in chosen:
            continue
        chosen.add(pair)
        edge_list.append(pair)
        placed += 1
    return edge_list, labels


def citation_graph(seed: int = 7) -> Graph:
    """Community graph with exactly 2,211 nodes and 5,214 edges.

    368 communities of 6 nodes plus one of 3, each a circulant (ring plus
    distance-2 chords; every base edge in a triangle) densified by extra
    within-community edges to ~90% internal density, plus 261 cross-community
    edges laid down as 87 bundles of three parallel bridges between distinct
    community pairs. Dense small communities and redundant bridges keep
    held-out edges predictable from the retained half of the graph, as in
    real citation networks; node degrees stay near the mean, which minimizes
    how many nodes a random edge split can fully disconnect.
    """
    rng = np.random.default_rng(seed)
    sizes = [6] * 368 + [3]
    n_comm = len(sizes)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    chosen: set[tuple[int, int]] = set()
    edge_list: list[tuple[int, int]] = []

    def add(u: int, v: int) -> bool:
        pair = (min(u, v), max(u, v))
        if u == v or pair in chosen:
            return False
        chosen.add(pair)
        edge_list.append(pair)
        return True

    for c, size in enumerate(sizes):
        base = int(offsets[c])
        for j in range(size):
            add(base + j, base + (j + 1) % size)
            add(base + j, base + (j + 2) % size)

    candidates = []
    for c, size in enumerate(sizes):
        base = int(offsets[c])
        for i in range(size):
            for j in range(i + 1, size):
                if (base + i, base + j) not in chosen:
                    candidates.append((base + i, base + j))
    n_extra = 5214 - 261 - len(edge_list)
    picked = rng.choice(len(candidates), size=n_extra, replace=False)
    for idx in sorted(int(i) for i in picked):
        add(*candidates[idx])

    def bridge(c_a: int, c_b: int) -> None:
        while True:
            u = int(offsets[c_a]) + int(rng.integers(sizes[c_a]))
            v = int(offsets[c_b]) + int(rng.integers(sizes[c_b]))
            if add(u, v):
                return

    partners = rng.permutation(n_comm)
    for k in range(87):
        for _ in range(3):
            bridge(int(partners[2 * k]), int(partners[2 * k + 1]))

    ids = [f"p{i:04d}" for i in range(int(offsets[-1]))]
    return Graph(ids, edge_list)


def community_labels(sizes) -> np.ndarray:
    return np.concatenate([np.full(s, c, dtype=np.int64) for c, s in enumerate(sizes)])


def anagram_keywords(count: int = 20) -> list[str]:
    """``count`` distinct 9-letter words: 's' + permutation of 'aginrtu' + 'e'.

    Same letter multiset, same first and last character for every keyword, so
    the words differ only in interior letter order.
    """
    if not (1 <= count <= 5040):
        raise ValueError("count must be in [1, 5040]")
    step = 5040 // count
    words = []
    for i, perm in enumerate(itertools.permutations("aginrtu")):
        if i % step == 0:
            words.append("s" + "".join(perm) + "e")
            if len(words) == count:
                break
    return words


def keyword_graph(seed: int = 11) -> tuple[Graph, dict[str, str]]:
    """1,000-node graph whose edges exist only between nodes sharing a keyword.

    20 groups of 50 nodes; each group has a ring plus extra internal edges
    (4,000 edges total, average degree 8). Each node's text is its group
    keyword placed at a random position among three generic filler words.
    Returns the graph and a map external id -> raw text.
    """
    rng = np.random.default_rng(seed)
    sizes = [50] * 20
    edges, labels = _ring_and_extra_edges(sizes, extra_intra=3000, n_inter=0, rng=rng)
    n = int(np.sum(sizes))
    ids = [f"d{i:03d}" for i in range(n)]
    keywords = anagram_keywords(len(sizes))

    texts: dict[str, str] = {}
    for v in range(n):
        fillers = [FILLER_WORDS[int(k)] for k in rng.integers(len(FILLER_WORDS), size=3)]
        slot = int(rng.integers(4))
        tokens = fillers[:slot] + [keywords[int(labels[v])]] + fillers[slot:]
        texts[ids[v]] = " ".join(tokens)
    return Graph(ids, edges), texts
