"""Link-prediction evaluation: paired AUC, logistic-regression AUC, the
mean-word-vector text baseline, and the unseen-node protocol.

For every node with at least one held-out edge the harness draws one true
held-out partner and one non-adjacent node, then scores the positive against
the negative. ``auc_pair`` compares raw inner products; ``auc_lr`` fits an
internal logistic regression on Hadamard edge features of a training portion
and compares predicted probabilities on the rest.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, EdgeSplit


@dataclass
class EvalTriple:
    center: int
    positive: int
    negative: int


@dataclass
class LRModel:
    weights: np.ndarray
    bias: float
    feature_mean: np.ndarray | None = None
    feature_scale: np.ndarray | None = None

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        if self.feature_mean is not None:
            x = (x - self.feature_mean) / self.feature_scale
        z = x @ self.weights + self.bias
        return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


@dataclass
class EvalReport:
    auc_lr: float
    auc_pair: float
    triple_count: int
    config: dict = field(default_factory=dict)

    def as_record(self) -> dict:
        rec = {"auc_lr": round(self.auc_lr, 6), "auc_pair": round(self.auc_pair, 6),
               "triples": self.triple_count}
        rec.update(self.config)
        return rec


def build_eval_triples(split: EdgeSplit, seed: int) -> list[EvalTriple]:
    """One (center, positive, negative) triple per node with held-out edges.

    The positive is a uniformly chosen held-out partner; the negative is a
    uniformly chosen node adjacent to the center in neither the training nor
    the held-out edge set (rejection sampling capped at 100 tries, then a
    linear scan). Nodes adjacent to everything are skipped with a warning.
    """
    if not split.held_out:
        raise ValueError("no held-out edges to evaluate")
    g = split.train_graph
    n = g.node_count
    partners: dict[int, list[int]] = {}
    for u, v in split.held_out:
        partners.setdefault(u, []).append(v)
        partners.setdefault(v, []).append(u)
    full_adj: dict[int, set[int]] = {}
    for c in partners:
        full_adj[c] = set(int(x) for x in g.neighbors(c)) | set(partners[c])

    rng = np.random.default_rng(seed)
    triples = []
    for c in sorted(partners):
        pos_list = partners[c]
        pos = pos_list[int(rng.integers(len(pos_list)))]
        blocked = full_adj[c]
        neg = None
        for _ in range(100):
            cand = int(rng.integers(n))
            if cand != c and cand not in blocked:
                neg = cand
                break
        if neg is None:
            free = [v for v in range(n) if v != c and v not in blocked]
            if not free:
                warnings.warn(f"node {g.id_list[c]} is adjacent to all others; skipped")
                continue
            neg = free[int(rng.integers(len(free)))]
        triples.append(EvalTriple(center=c, positive=pos, negative=neg))
    return triples


def auc_from_scores(pos_scores, neg_scores) -> float:
    """Fraction of index-paired comparisons with pos > neg; ties count half."""
    pos = np.asarray(pos_scores, dtype=np.float64)
    neg = np.asarray(neg_scores, dtype=np.float64)
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("score lists must be nonempty")
    if len(pos) != len(neg):
        raise ValueError(f"paired comparison needs equal lengths, got {len(pos)} vs {len(neg)}")
    wins = np.count_nonzero(pos > neg)
    ties = np.count_nonzero(pos == neg)
    return (wins + 0.5 * ties) / len(pos)


def auc_pair(embeddings, triples: list[EvalTriple]) -> float:
    """Paired inner-product AUC: e_c . e_p versus e_c . e_n per triple."""
    pos = np.empty(len(triples))
    neg = np.empty(len(triples))
    for k, t in enumerate(triples):
        e_c = embeddings[t.center]
        pos[k] = float(e_c @ embeddings[t.positive])
        neg[k] = float(e_c @ embeddings[t.negative])
    return auc_from_scores(pos, neg)


def train_logistic(features, labels, lr: float = 0.5, epochs: int = 300,
                   l2: float = 1e-4, standardize: bool = True) -> LRModel:
    """Full-batch gradient-descent logistic regression, zero init, fixed order.

    Features are standardized internally by default (mean/scale estimated on
    the training data) so convergence does not depend on the raw embedding
    scale; the learned model carries the transform.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or len(x) != len(y):
        raise ValueError("features must be (n, d) with matching labels")
    if len(np.unique(y)) < 2:
        raise ValueError("need at least one example of each class")
    mean = scale = None
    if standardize:
        mean = x.mean(axis=0)
        scale = x.std(axis=0)
        scale[scale == 0] = 1.0
        x = (x - mean) / scale
    n, d = x.shape
    w = np.zeros(d)
    b = 0.0
    for _ in range(epochs):
        z = x @ w + b
        p = 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
        err = p - y
        w -= lr * (x.T @ err / n + l2 * w)
        b -= lr * float(err.mean())
    return LRModel(weights=w, bias=b, feature_mean=mean, feature_scale=scale)


def hadamard_features(embeddings, triples: list[EvalTriple]):
    """Per triple: Hadamard features for the positive and the negative edge."""
    pos = np.stack([embeddings[t.center] * embeddings[t.positive] for t in triples])
    neg = np.stack([embeddings[t.center] * embeddings[t.negative] for t in triples])
    return pos, neg


def auc_lr(embeddings, triples: list[EvalTriple], split_fraction: float = 0.5,
           seed: int = 0, lr: float = 0.5, epochs: int = 300, l2: float = 1e-4) -> float:
    """Logistic-regression AUC over Hadamard edge features.

    Triples are shuffled and split; the classifier fits on the first
    ``split_fraction`` (positive and negative example per triple) and the
    paired AUC is computed from predicted probabilities on the rest.
    """
    if len(triples) < 4:
        raise ValueError("need at least 4 triples for a train/test split")
    if not (0.0 < split_fraction < 1.0):
        raise ValueError("split_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(triples))
    n_fit = int(round(split_fraction * len(triples)))
    n_fit = min(max(n_fit, 2), len(triples) - 2)
    fit_triples = [triples[i] for i in order[:n_fit]]
    test_triples = [triples[i] for i in order[n_fit:]]

    pos_fit, neg_fit = hadamard_features(embeddings, fit_triples)
    x = np.concatenate([pos_fit, neg_fit])
    y = np.concatenate([np.ones(len(pos_fit)), np.zeros(len(neg_fit))])
    model = train_logistic(x, y, lr=lr, epochs=epochs, l2=l2)

    pos_test, neg_test = hadamard_features(embeddings, test_triples)
    return auc_from_scores(model.predict_proba(pos_test), model.predict_proba(neg_test))


def evaluate(embeddings, triples: list[EvalTriple], split_fraction: float = 0.5,
             seed: int = 0, config: dict | None = None) -> EvalReport:
    """Paired and LR AUC in one report."""
    return EvalReport(
        auc_lr=auc_lr(embeddings, triples, split_fraction=split_fraction, seed=seed),
        auc_pair=auc_pair(embeddings, triples),
        triple_count=len(triples),
        config=dict(config or {}),
    )


# -- text-matching baseline ------------------------------------------------

def load_word_vectors(path) -> dict[str, np.ndarray]:
    """Read GloVe-style vectors: one ``word v1 .. v_d`` line per word."""
    out: dict[str, np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            toks = line.rstrip("\n").split(" ")
            if len(toks) < 2:
                raise ValueError(f"{path}:{lineno}: expected 'word v1 ... v_d'")
            out[toks[0]] = np.array([float(x) for x in toks[1:]])
    return out


def text_matching_embed(texts: dict[int, list[str]],
                        vectors: dict[str, np.ndarray]) -> dict[int, np.ndarray]:
    """Average pre-trained word vector per node; all-OOV texts get zeros."""
    dim = len(next(iter(vectors.values())))
    out = {}
    for node, tokens in texts.items():
        hits = [vectors[t] for t in tokens if t in vectors]
        out[node] = np.mean(hits, axis=0) if hits else np.zeros(dim)
    return out


# -- unseen-node protocol --------------------------------------------------

@dataclass
class UnseenSplit:
    """Nodes removed (with all incident edges) for inductive evaluation.

    The training graph contains only surviving nodes (re-indexed, external
    ids and their relative order preserved); ``removed`` and all triples
    built from this split live in the index space of the original graph.
    ``survivor_index`` maps an original node index to its training index.
    """
    train_graph: Graph
    removed: list[tuple[int, list[int]]]  # (node, its original partners)
    survivor_index: dict[int, int]
    fraction: float
    seed: int

    def lift_embeddings(self, train_embeddings,
                        unseen_embeddings: dict[int, np.ndarray]) -> dict[int, np.ndarray]:
        """Merge trained (survivor) and text-encoded (removed) vectors into a
        single original-index table usable by auc_pair."""
        out = {orig: np.asarray(train_embeddings[tr])
               for orig, tr in self.survivor_index.items()}
        out.update({k: np.asarray(v) for k, v in unseen_embeddings.items()})
        return out


def zero_shot_split(g: Graph, fraction: float, seed: int) -> UnseenSplit:
    """Remove ceil(fraction * |V|) random nodes with all incident edges.

    The returned training graph has node count |V| - ceil(fraction * |V|);
    removed nodes keep their texts (handled by the caller, keyed by external
    id, which this split never touches).
    """
    if not (0.0 <= fraction < 1.0):
        raise ValueError("fraction must be in [0, 1)")
    rng = np.random.default_rng(seed)
    n_remove = int(np.ceil(fraction * g.node_count))
    removed_nodes = sorted(int(v) for v in
                           rng.choice(g.node_count, size=n_remove, replace=False))
    removed_set = set(removed_nodes)
    survivors = [v for v in range(g.node_count) if v not in removed_set]
    survivor_index = {orig: tr for tr, orig in enumerate(survivors)}
    kept_edges = [(survivor_index[u], survivor_index[v]) for u, v in g.edges()
                  if u not in removed_set and v not in removed_set]
    train = Graph([g.id_list[v] for v in survivors], kept_edges)
    removed = [(v, [int(x) for x in g.neighbors(v)]) for v in removed_nodes]
    return UnseenSplit(train_graph=train, removed=removed,
                       survivor_index=survivor_index, fraction=fraction, seed=seed)


def build_zero_shot_triples(split: UnseenSplit, g: Graph, seed: int,
                            triples_per_node: int = 1) -> list[EvalTriple]:
    """Triples for removed nodes, in the original graph's index space.

    Positives are removed-edge partners that survived into the train graph;
    negatives are uniform nodes non-adjacent in the original graph. With
    ``triples_per_node`` > 1 each removed node is paired with up to that many
    surviving partners (without replacement) to cut variance when the removal
    fraction is small.
    """
    rng = np.random.default_rng(seed)
    removed_set = {v for v, _ in split.removed}
    n = g.node_count
    triples = []
    for node, partners in split.removed:
        surviving = [p for p in partners if p not in removed_set]
        if not surviving:
            warnings.warn(f"removed node {g.id_list[node]} has no surviving partner; skipped")
            continue
        k = min(triples_per_node, len(surviving))
        chosen = rng.choice(len(surviving), size=k, replace=False)
        blocked = set(partners) | {node}
        for idx in chosen:
            pos = surviving[int(idx)]
            neg = None
            for _ in range(100):
                cand = int(rng.integers(n))
                if cand not in blocked:
                    neg = cand
                    break
            if neg is None:
                free = [v for v in range(n) if v not in blocked]
                if not free:
                    continue
                neg = free[int(rng.integers(len(free)))]
            triples.append(EvalTriple(center=node, positive=pos, negative=neg))
    return triples
