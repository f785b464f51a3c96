"""SkipGram negative-sampling trainer over (center, neighbor) pairs.

From-scratch numpy implementation: central/context lookup tables, degree^0.75
negative sampling, analytic gradients, and sparse AdaGrad updates with lazy
L2 (decay touches only the rows updated in a step, keeping each update
O(dim)).

Pairs are processed in configurable batches; ``batch_size=1`` (the default)
is the per-pair reference schedule. Within one optimization step, gradient
contributions that land on the same row are summed before the single AdaGrad
update for that row. Single-threaded runs are bit-reproducible for a fixed
config; ``threads > 1`` applies unsynchronized sparse updates from worker
shards (hogwild-style) and trades reproducibility for throughput.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .sampling import PairSet
from .seeds import worker_rng


@dataclass
class TrainConfig:
    """Hyperparameters for lookup-table and text-encoder training."""
    dim: int = 128
    epochs: int = 5
    learning_rate: float = 0.1
    l2: float = 1e-5
    n_neg: int = 5
    seed: int = 0
    batch_size: int = 1
    threads: int = 1
    eps: float = 1e-8

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")
        if self.n_neg < 1:
            raise ValueError("n_neg must be >= 1")


class EmbeddingTable:
    """Central and context embedding matrices for one node universe."""

    def __init__(self, central: np.ndarray, context: np.ndarray):
        if central.shape != context.shape:
            raise ValueError("central/context shape mismatch")
        self.central = central
        self.context = context
        self.dim = central.shape[1]

    @classmethod
    def init(cls, n_nodes: int, dim: int, rng: np.random.Generator) -> "EmbeddingTable":
        # word2vec convention: small uniform central vectors, zero context
        central = rng.uniform(-0.5 / dim, 0.5 / dim, size=(n_nodes, dim))
        context = np.zeros((n_nodes, dim))
        return cls(central, context)

    @property
    def n_nodes(self) -> int:
        return self.central.shape[0]

    def combined(self) -> np.ndarray:
        """Element-wise mean of the central and context tables.

        The two tables drift toward roughly opposite shared directions during
        negative-sampling training, so their mean is far less anisotropic than
        either table alone; it is the export used for downstream scoring
        (same reasoning as summing the two GloVe matrices).
        """
        return (self.central + self.context) / 2.0


class NegativeSampler:
    """Draws nodes with probability proportional to degree^(3/4)."""

    def __init__(self, g: Graph):
        degrees = g.degrees().astype(np.float64)
        weights = degrees ** 0.75
        total = weights.sum()
        if total == 0:
            raise ValueError("cannot build a negative sampler on an edgeless graph")
        self.probabilities = weights / total
        self._cum = np.cumsum(self.probabilities)
        self._cum[-1] = 1.0

    def draw(self, rng: np.random.Generator, size=None) -> np.ndarray:
        """Sample node indices; ``size`` may be an int or a shape tuple."""
        r = rng.random(size if size is not None else 1)
        return np.searchsorted(self._cum, r, side="right").astype(np.int64)


def build_negative_sampler(g: Graph) -> NegativeSampler:
    return NegativeSampler(g)


def log_sigmoid(x):
    """Numerically stable log(sigmoid(x))."""
    return -np.logaddexp(0.0, -x)


def sgns_loss_grads(e_center: np.ndarray, e_ctx_pos: np.ndarray,
                    e_ctx_negs) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Negative-sampling loss and analytic gradients for one pair.

    loss = -log sigma(e_pos . e_c) - sum_k log sigma(-e_neg_k . e_c)

    Returns (loss, grad_center, grad_pos, grad_negs); L2 terms are the step
    function's business, not part of the loss here.
    """
    e_negs = np.asarray(e_ctx_negs, dtype=np.float64)
    if e_negs.ndim == 1:
        e_negs = e_negs.reshape(1, -1)
    s_pos = float(e_ctx_pos @ e_center)
    s_negs = e_negs @ e_center
    loss = float(np.logaddexp(0.0, -s_pos) + np.logaddexp(0.0, s_negs).sum())
    coef_pos = _sigmoid_scalar(s_pos) - 1.0
    coef_negs = np.exp(log_sigmoid(s_negs))
    grad_center = coef_pos * e_ctx_pos + coef_negs @ e_negs
    grad_pos = coef_pos * e_center
    grad_negs = coef_negs[:, None] * e_center[None, :]
    return loss, grad_center, grad_pos, grad_negs


def _sigmoid_scalar(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    z = np.exp(x)
    return z / (1.0 + z)


def adagrad_step(param: np.ndarray, grad: np.ndarray, accumulator: np.ndarray,
                 lr: float, eps: float = 1e-8, l2: float = 0.0):
    """In-place AdaGrad update; returns (param, accumulator).

    The effective gradient is grad + l2 * param; the accumulator collects its
    elementwise square and scales the step by 1 / (sqrt(acc) + eps).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    g = grad + l2 * param if l2 else grad
    accumulator += g * g
    param -= lr * g / (np.sqrt(accumulator) + eps)
    return param, accumulator


def sparse_adagrad_update(table: np.ndarray, acc: np.ndarray, rows: np.ndarray,
                          grads: np.ndarray, lr: float, eps: float, l2: float) -> None:
    """AdaGrad step on a subset of table rows, summing duplicate-row gradients."""
    uniq, inverse = np.unique(rows, return_inverse=True)
    summed = np.zeros((len(uniq), table.shape[1]))
    np.add.at(summed, inverse, grads)
    if l2:
        summed += l2 * table[uniq]
    a = acc[uniq] + summed * summed
    acc[uniq] = a
    table[uniq] -= lr * summed / (np.sqrt(a) + eps)


def _train_shard(centers, neighbors, order, table: EmbeddingTable,
                 acc_central, acc_context, sampler: NegativeSampler,
                 cfg: TrainConfig, rng, loss_out, shard_id):
    """Run one epoch shard; accumulates summed loss into loss_out[shard_id]."""
    central, context = table.central, table.context
    lr, eps, l2, n_neg = cfg.learning_rate, cfg.eps, cfg.l2, cfg.n_neg
    total = 0.0
    B = max(1, cfg.batch_size)
    for lo in range(0, len(order), B):
        idx = order[lo:lo + B]
        c_rows = centers[idx]
        ctx_rows = np.empty((len(idx), 1 + n_neg), dtype=np.int64)
        ctx_rows[:, 0] = neighbors[idx]
        ctx_rows[:, 1:] = sampler.draw(rng, (len(idx), n_neg))
        e_c = central[c_rows]
        e_ctx = context[ctx_rows]
        scores = np.einsum("bkd,bd->bk", e_ctx, e_c)
        total += float(np.logaddexp(0.0, -scores[:, 0]).sum()
                       + np.logaddexp(0.0, scores[:, 1:]).sum())
        coef = np.exp(log_sigmoid(scores))
        coef[:, 0] -= 1.0
        g_c = np.einsum("bk,bkd->bd", coef, e_ctx)
        g_ctx = coef[:, :, None] * e_c[:, None, :]
        sparse_adagrad_update(central, acc_central, c_rows, g_c, lr, eps, l2)
        sparse_adagrad_update(context, acc_context, ctx_rows.ravel(),
                              g_ctx.reshape(-1, table.dim), lr, eps, l2)
    loss_out[shard_id] = total


def train_pairs(pairs: PairSet, g: Graph, cfg: TrainConfig) -> tuple[EmbeddingTable, list[float]]:
    """Train lookup embeddings on a pair multiset.

    Per pair: draw ``n_neg`` negatives, compute the negative-sampling loss
    gradients, and AdaGrad-update the center's central row plus the positive
    and negative context rows. Pair order is reshuffled every epoch from the
    config seed.

    Returns the trained table and the mean per-pair loss of each epoch.
    """
    if len(pairs) == 0:
        raise ValueError("cannot train on an empty pair set")
    centers = np.asarray(pairs.centers, dtype=np.int64)
    neighbors = np.asarray(pairs.neighbors, dtype=np.int64)
    hi = max(int(centers.max()), int(neighbors.max()))
    if hi >= g.node_count or int(min(centers.min(), neighbors.min())) < 0:
        raise ValueError("pair references a node outside the graph")

    rng = np.random.default_rng(cfg.seed)
    table = EmbeddingTable.init(g.node_count, cfg.dim, rng)
    acc_central = np.zeros_like(table.central)
    acc_context = np.zeros_like(table.context)
    sampler = build_negative_sampler(g)

    epoch_losses = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(centers))
        if cfg.threads <= 1:
            loss_out = [0.0]
            _train_shard(centers, neighbors, order, table, acc_central, acc_context,
                         sampler, cfg, rng, loss_out, 0)
        else:
            shards = np.array_split(order, cfg.threads)
            loss_out = [0.0] * cfg.threads
            workers = [threading.Thread(target=_train_shard,
                                        args=(centers, neighbors, shard, table,
                                              acc_central, acc_context, sampler, cfg,
                                              worker_rng(cfg.seed, f"train-epoch{epoch}", w),
                                              loss_out, w))
                       for w, shard in enumerate(shards)]
            for t in workers:
                t.start()
            for t in workers:
                t.join()
        epoch_losses.append(sum(loss_out) / len(centers))
    return table, epoch_losses


# -- embedding file format (word2vec text layout) --------------------------

def write_embeddings(path, g: Graph, vectors: np.ndarray) -> None:
    """Write ``<count> <dim>`` then one ``id v1 .. v_dim`` line per node."""
    n, dim = vectors.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{n} {dim}\n")
        for i in range(n):
            coords = " ".join(f"{x:.6f}" for x in vectors[i])
            fh.write(f"{g.id_list[i]} {coords}\n")


def read_embeddings(path) -> dict[str, np.ndarray]:
    """Read a word2vec-text embedding file into an id -> vector map."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: malformed header, expected '<count> <dim>'")
        count, dim = int(header[0]), int(header[1])
        out: dict[str, np.ndarray] = {}
        for line in fh:
            toks = line.rstrip("\n").split(" ")
            if len(toks) != dim + 1:
                raise ValueError(f"{path}: bad row for id {toks[0]!r}")
            out[toks[0]] = np.array([float(x) for x in toks[1:]])
    if len(out) != count:
        raise ValueError(f"{path}: header claims {count} rows, found {len(out)}")
    return out
