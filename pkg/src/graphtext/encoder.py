"""Text-driven node encoder: char+word bidirectional LSTMs over node texts.

Each token contributes a word embedding concatenated with a character-level
summary (final states of a char BiLSTM over the token's characters). The
token sequence runs through a word-level BiLSTM whose per-timestep states
are mean-pooled and projected through tanh into the node embedding space.

Because the embedding is a pure function of the text, nodes never seen in
training can be embedded from their descriptions alone. Training couples the
encoder output to a context lookup table with the same negative-sampling
loss as the lookup trainer.

Gradients are hand-derived end to end (see lstm.py); embeddings receive
sparse per-row AdaGrad updates, dense parameters dense ones.
"""

from __future__ import annotations

import io
import json
import zipfile
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .lstm import (LSTMParams, bilstm_final, bilstm_final_backward,
                   bilstm_outputs, bilstm_outputs_backward)
from .sampling import PairSet
from .text import Vocabulary, preprocess_text
from .training import TrainConfig, build_negative_sampler, sparse_adagrad_update

CHECKPOINT_VERSION = 1


@dataclass
class EncoderConfig:
    """Architecture knobs for the text encoder."""
    char_dim: int = 16
    char_hidden: int = 32
    word_dim: int = 64
    word_hidden: int = 64
    dim: int = 128
    max_len: int = 128
    use_char: bool = True
    use_word: bool = True
    pool: str = "mean"  # "mean" or "final"

    def __post_init__(self):
        if self.pool not in ("mean", "final"):
            raise ValueError(f"pool must be 'mean' or 'final', got {self.pool!r}")
        if not (self.use_char or self.use_word):
            raise ValueError("at least one of use_char/use_word must be enabled")


class TextEncoderParams:
    """All trainable arrays of the encoder, plus the config they realize."""

    def __init__(self, cfg: EncoderConfig, vocab: Vocabulary, rng: np.random.Generator):
        self.cfg = cfg
        d_c, h_c = cfg.char_dim, cfg.char_hidden
        d_w, h_w = cfg.word_dim, cfg.word_hidden
        self.char_emb = rng.uniform(-0.5 / d_c, 0.5 / d_c, size=(vocab.n_chars, d_c))
        self.word_emb = rng.uniform(-0.5 / d_w, 0.5 / d_w, size=(vocab.n_words, d_w))
        self.char_fwd = LSTMParams.init(d_c, h_c, rng)
        self.char_bwd = LSTMParams.init(d_c, h_c, rng)
        word_in = d_w + 2 * h_c
        self.word_fwd = LSTMParams.init(word_in, h_w, rng)
        self.word_bwd = LSTMParams.init(word_in, h_w, rng)
        limit = np.sqrt(6.0 / (cfg.dim + 2 * h_w))
        self.proj_w = rng.uniform(-limit, limit, size=(cfg.dim, 2 * h_w))
        self.proj_b = np.zeros(cfg.dim)

    def zero_(self) -> "TextEncoderParams":
        """Zero every parameter in place (testing hook: tanh(b) fixed point)."""
        for arr in self.dense_arrays():
            arr[:] = 0.0
        self.char_emb[:] = 0.0
        self.word_emb[:] = 0.0
        return self

    def dense_arrays(self) -> list[np.ndarray]:
        """Dense parameter arrays in a fixed order (LSTMs then projection)."""
        out = []
        for p in (self.char_fwd, self.char_bwd, self.word_fwd, self.word_bwd):
            out.extend(p.arrays())
        out.extend([self.proj_w, self.proj_b])
        return out


@dataclass
class EncodedNode:
    embedding: np.ndarray
    token_count: int


@dataclass
class EncoderGrads:
    """Gradients matching TextEncoderParams.

    Embedding gradients are sparse: parallel (rows, grads) arrays with one
    entry per occurrence; duplicates are summed at update time.
    """
    dense: list[np.ndarray]
    char_rows: np.ndarray
    char_grads: np.ndarray
    word_rows: np.ndarray
    word_grads: np.ndarray


def tokenize(tokens: list[str], vocab: Vocabulary, max_len: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """Map tokens to (word indices, per-token char index arrays), truncated.

    Out-of-vocabulary words map to the UNK word index while their characters
    are still looked up individually (unknown characters map to UNK char).
    An empty token list maps to the single UNK pseudo-token whose character
    sequence is the lone UNK character.
    """
    tokens = tokens[:max_len]
    if not tokens:
        return np.array([0], dtype=np.int64), [np.array([0], dtype=np.int64)]
    word_idx = np.array([vocab.word_index(t) for t in tokens], dtype=np.int64)
    char_idx = [vocab.char_indices(t) for t in tokens]
    return word_idx, char_idx


def char_word_embedding(char_indices: np.ndarray, params: TextEncoderParams) -> np.ndarray:
    """Character-level summary of one word: concatenated BiLSTM final states."""
    xs = params.char_emb[char_indices]
    summary, _ = bilstm_final(xs, params.char_fwd, params.char_bwd)
    return summary


def encode_indices(word_idx: np.ndarray, char_idx: list[np.ndarray],
                   params: TextEncoderParams):
    """Forward pass from index arrays; returns (embedding, cache)."""
    cfg = params.cfg
    T = len(word_idx)
    h_c2 = 2 * cfg.char_hidden
    xs = np.empty((T, cfg.word_dim + h_c2))
    char_caches = []
    for j in range(T):
        if cfg.use_word:
            xs[j, :cfg.word_dim] = params.word_emb[word_idx[j]]
        else:
            xs[j, :cfg.word_dim] = 0.0
        if cfg.use_char:
            cxs = params.char_emb[char_idx[j]]
            summary, caches = bilstm_final(cxs, params.char_fwd, params.char_bwd)
            xs[j, cfg.word_dim:] = summary
            char_caches.append(caches)
        else:
            xs[j, cfg.word_dim:] = 0.0
            char_caches.append(None)
    outputs, word_caches = bilstm_outputs(xs, params.word_fwd, params.word_bwd)
    if cfg.pool == "mean":
        pooled = outputs.mean(axis=0)
    else:
        h_w = cfg.word_hidden
        pooled = np.concatenate([outputs[-1, :h_w], outputs[0, h_w:]])
    pre = params.proj_w @ pooled + params.proj_b
    emb = np.tanh(pre)
    cache = (word_idx, char_idx, char_caches, xs, outputs, word_caches, pooled, emb)
    return emb, cache


def encode_indices_backward(d_emb: np.ndarray, cache, params: TextEncoderParams) -> EncoderGrads:
    """Backward pass for ``encode_indices`` given d(loss)/d(embedding)."""
    cfg = params.cfg
    word_idx, char_idx, char_caches, xs, outputs, word_caches, pooled, emb = cache
    T = len(word_idx)
    h_w = cfg.word_hidden

    d_pre = d_emb * (1.0 - emb ** 2)
    g_proj_w = np.outer(d_pre, pooled)
    g_proj_b = d_pre.copy()
    d_pooled = params.proj_w.T @ d_pre

    d_outputs = np.zeros_like(outputs)
    if cfg.pool == "mean":
        d_outputs[:] = d_pooled / T
    else:
        d_outputs[-1, :h_w] = d_pooled[:h_w]
        d_outputs[0, h_w:] = d_pooled[h_w:]

    d_xs, g_wf, g_wb = bilstm_outputs_backward(d_outputs, word_caches,
                                               params.word_fwd, params.word_bwd)

    word_rows = []
    word_grads = []
    char_rows = []
    char_grads = []
    g_cf = g_cb = None
    for j in range(T):
        if cfg.use_word:
            word_rows.append(word_idx[j])
            word_grads.append(d_xs[j, :cfg.word_dim].copy())
        if cfg.use_char:
            d_summary = d_xs[j, cfg.word_dim:]
            d_cxs, gf, gb = bilstm_final_backward(d_summary, char_caches[j],
                                                  params.char_fwd, params.char_bwd)
            char_rows.append(char_idx[j])
            char_grads.append(d_cxs)
            if g_cf is None:
                g_cf, g_cb = gf, gb
            else:
                for dst, src in ((g_cf, gf), (g_cb, gb)):
                    dst.wx += src.wx
                    dst.wh += src.wh
                    dst.b += src.b

    d_c, h_c = cfg.char_dim, cfg.char_hidden
    if g_cf is None:
        from .lstm import LSTMGrads
        g_cf = LSTMGrads(np.zeros((4 * h_c, d_c)), np.zeros((4 * h_c, h_c)), np.zeros(4 * h_c))
        g_cb = LSTMGrads(np.zeros((4 * h_c, d_c)), np.zeros((4 * h_c, h_c)), np.zeros(4 * h_c))

    dense = [g_cf.wx, g_cf.wh, g_cf.b, g_cb.wx, g_cb.wh, g_cb.b,
             g_wf.wx, g_wf.wh, g_wf.b, g_wb.wx, g_wb.wh, g_wb.b,
             g_proj_w, g_proj_b]
    return EncoderGrads(
        dense=dense,
        char_rows=np.concatenate(char_rows) if char_rows else np.empty(0, np.int64),
        char_grads=np.concatenate(char_grads) if char_grads else np.empty((0, d_c)),
        word_rows=np.array(word_rows, dtype=np.int64),
        word_grads=np.array(word_grads) if word_grads else np.empty((0, cfg.word_dim)),
    )


def encode_node(tokens: list[str], vocab: Vocabulary, params: TextEncoderParams) -> EncodedNode:
    """Embed a preprocessed token sequence. Raises on an empty sequence."""
    if not tokens:
        raise ValueError("encode_node requires a nonempty token sequence "
                         "(use encode_unseen for raw text with fallback)")
    word_idx, char_idx = tokenize(tokens, vocab, params.cfg.max_len)
    emb, _ = encode_indices(word_idx, char_idx, params)
    return EncodedNode(embedding=emb, token_count=len(word_idx))


def encode_unseen(raw: str, vocab: Vocabulary, params: TextEncoderParams) -> EncodedNode:
    """Embed raw text of a node absent from training; OOV-safe.

    Preprocesses the text, maps unknown words/characters to UNK, and runs the
    encoder. Text that preprocesses to nothing falls back to the UNK-only
    pseudo-sequence. Pure function of (text, params).
    """
    tokens = preprocess_text(raw)
    word_idx, char_idx = tokenize(tokens, vocab, params.cfg.max_len)
    emb, _ = encode_indices(word_idx, char_idx, params)
    return EncodedNode(embedding=emb, token_count=len(word_idx))


class _AdaGradState:
    """Accumulators mirroring a TextEncoderParams plus the context table."""

    def __init__(self, params: TextEncoderParams, context: np.ndarray):
        self.dense = [np.zeros_like(a) for a in params.dense_arrays()]
        self.char_emb = np.zeros_like(params.char_emb)
        self.word_emb = np.zeros_like(params.word_emb)
        self.context = np.zeros_like(context)


def train_text_encoder(g: Graph, texts: dict[int, list[str]], pairs: PairSet,
                       cfg: TrainConfig, enc_cfg: EncoderConfig, vocab: Vocabulary,
                       params: TextEncoderParams | None = None):
    """Train the encoder end to end against a context lookup table.

    ``texts`` maps every node that appears as a pair center to its
    preprocessed tokens. Per pair: the center embedding comes from the
    encoder, the positive and sampled negatives from the context table;
    gradients flow through the whole encoder for the center and through the
    touched lookup rows for contexts, all under AdaGrad with lazy L2.

    Returns (params, context_table, epoch_losses).
    """
    if len(pairs) == 0:
        raise ValueError("cannot train on an empty pair set")
    rng = np.random.default_rng(cfg.seed)
    if params is None:
        params = TextEncoderParams(enc_cfg, vocab, rng)
    context = np.zeros((g.node_count, enc_cfg.dim))
    sampler = build_negative_sampler(g)
    state = _AdaGradState(params, context)

    tokenized: dict[int, tuple[np.ndarray, list[np.ndarray]]] = {}
    for node in np.unique(pairs.centers):
        node = int(node)
        if node not in texts:
            raise ValueError(f"node {g.id_list[node]} has pairs but no text")
        tokenized[node] = tokenize(texts[node], vocab, enc_cfg.max_len)

    dense_params = params.dense_arrays()
    lr, eps, l2, n_neg = cfg.learning_rate, cfg.eps, cfg.l2, cfg.n_neg
    centers = pairs.centers
    neighbors = pairs.neighbors
    epoch_losses = []
    for _ in range(cfg.epochs):
        order = rng.permutation(len(centers))
        total = 0.0
        for k in order:
            c = int(centers[k])
            word_idx, char_idx = tokenized[c]
            e_c, cache = encode_indices(word_idx, char_idx, params)
            ctx_rows = np.empty(1 + n_neg, dtype=np.int64)
            ctx_rows[0] = neighbors[k]
            ctx_rows[1:] = sampler.draw(rng, n_neg)
            e_ctx = context[ctx_rows]
            scores = e_ctx @ e_c
            total += float(np.logaddexp(0.0, -scores[0]) + np.logaddexp(0.0, scores[1:]).sum())
            coef = 1.0 / (1.0 + np.exp(-scores))
            coef[0] -= 1.0
            d_emb = coef @ e_ctx
            g_ctx = coef[:, None] * e_c[None, :]
            grads = encode_indices_backward(d_emb, cache, params)

            sparse_adagrad_update(context, state.context, ctx_rows, g_ctx, lr, eps, l2)
            if enc_cfg.use_char and len(grads.char_rows):
                sparse_adagrad_update(params.char_emb, state.char_emb,
                                      grads.char_rows, grads.char_grads, lr, eps, l2)
            if enc_cfg.use_word and len(grads.word_rows):
                sparse_adagrad_update(params.word_emb, state.word_emb,
                                      grads.word_rows, grads.word_grads, lr, eps, l2)
            for arr, grad, acc in zip(dense_params, grads.dense, state.dense):
                geff = grad + l2 * arr
                acc += geff * geff
                arr -= lr * geff / (np.sqrt(acc) + eps)
        epoch_losses.append(total / len(centers))
    return params, context, epoch_losses


def encode_all(node_tokens: dict[int, list[str]], vocab: Vocabulary,
               params: TextEncoderParams) -> dict[int, np.ndarray]:
    """Embed every node in the map (pure, parallel-safe reads)."""
    out = {}
    for node, tokens in node_tokens.items():
        word_idx, char_idx = tokenize(tokens, vocab, params.cfg.max_len)
        emb, _ = encode_indices(word_idx, char_idx, params)
        out[node] = emb
    return out


# -- checkpoint format -----------------------------------------------------
#
# A checkpoint is a numpy .npz archive (zip of .npy arrays) with:
#   header      uint8 array holding UTF-8 JSON: {"format": "graphtext-encoder",
#               "version": 1, "config": {...}, "words": [...], "chars": [...]}
#   char_emb, word_emb, proj_w, proj_b
#   char_fwd_wx, char_fwd_wh, char_fwd_b   (and char_bwd_*, word_fwd_*, word_bwd_*)
# Arrays are stored float64 and round-trip bit-exactly.

_LSTM_KEYS = ("char_fwd", "char_bwd", "word_fwd", "word_bwd")


def save_checkpoint(path, params: TextEncoderParams, vocab: Vocabulary) -> None:
    cfg = params.cfg
    header = {
        "format": "graphtext-encoder",
        "version": CHECKPOINT_VERSION,
        "config": {k: getattr(cfg, k) for k in
                   ("char_dim", "char_hidden", "word_dim", "word_hidden",
                    "dim", "max_len", "use_char", "use_word", "pool")},
        "words": vocab.word_list[1:],
        "chars": vocab.char_list[1:],
    }
    arrays = {
        "header": np.frombuffer(json.dumps(header).encode("utf-8"), dtype=np.uint8),
        "char_emb": params.char_emb,
        "word_emb": params.word_emb,
        "proj_w": params.proj_w,
        "proj_b": params.proj_b,
    }
    for key in _LSTM_KEYS:
        p: LSTMParams = getattr(params, key)
        arrays[f"{key}_wx"] = p.wx
        arrays[f"{key}_wh"] = p.wh
        arrays[f"{key}_b"] = p.b
    # np.savez writes nondeterministic zip timestamps; fix them for
    # byte-identical reruns.
    buf = io.BytesIO()
    np.savez(buf, **arrays)
    buf.seek(0)
    with zipfile.ZipFile(buf, "r") as src, open(path, "wb") as out:
        data = {info.filename: src.read(info.filename) for info in src.infolist()}
        repacked = io.BytesIO()
        with zipfile.ZipFile(repacked, "w", zipfile.ZIP_STORED) as dst:
            for name in sorted(data):
                zi = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
                dst.writestr(zi, data[name])
        out.write(repacked.getvalue())


def load_checkpoint(path) -> tuple[TextEncoderParams, Vocabulary]:
    with np.load(path) as npz:
        header = json.loads(bytes(npz["header"]).decode("utf-8"))
        if header.get("format") != "graphtext-encoder":
            raise ValueError(f"{path}: not an encoder checkpoint")
        if header.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {header.get('version')}")
        cfg = EncoderConfig(**header["config"])
        vocab = Vocabulary(header["words"], header["chars"])
        params = TextEncoderParams(cfg, vocab, np.random.default_rng(0))
        params.char_emb = npz["char_emb"]
        params.word_emb = npz["word_emb"]
        params.proj_w = npz["proj_w"]
        params.proj_b = npz["proj_b"]
        for key in _LSTM_KEYS:
            setattr(params, key, LSTMParams(wx=npz[f"{key}_wx"],
                                            wh=npz[f"{key}_wh"],
                                            b=npz[f"{key}_b"]))
    return params, vocab
