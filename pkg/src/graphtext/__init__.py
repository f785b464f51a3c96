"""Graph embeddings from direct pair sampling and text encoders.

The package covers the full pipeline: edge-list graphs and splits, two pair
samplers (direct neighborhood sampling and biased random walks), a from-
scratch skip-gram negative-sampling trainer, a char+word BiLSTM text encoder
that can embed nodes never seen during training, and a link-prediction
evaluation harness. ``graphtext.cli`` exposes everything as subcommands.
"""

from .graph import (EdgeListFormatError, EdgeSplit, Graph, bfs_distances,
                    degree_stats, load_edge_list, split_edges, write_edge_list)
from .sampling import (PairSet, SamplingStats, extract_window_pairs,
                       random_walk, random_walks, read_pairs, sample_neighborhood,
                       sample_pairs, sample_ratio, sampling_stats, write_pairs,
                       write_walks)
from .training import (EmbeddingTable, NegativeSampler, TrainConfig,
                       adagrad_step, build_negative_sampler, read_embeddings,
                       sgns_loss_grads, train_pairs, write_embeddings)
from .text import Vocabulary, build_vocab, load_node_texts, preprocess_text, write_node_texts
from .encoder import (EncoderConfig, TextEncoderParams, encode_all, encode_node,
                      encode_unseen, load_checkpoint, save_checkpoint,
                      train_text_encoder)
from .evaluation import (EvalReport, EvalTriple, LRModel, UnseenSplit, auc_from_scores,
                         auc_lr, auc_pair, build_eval_triples, build_zero_shot_triples,
                         evaluate, load_word_vectors, text_matching_embed,
                         train_logistic, zero_shot_split)
from .seeds import stage_seed, stage_rng

__version__ = "0.1.0"

__all__ = [
    "EdgeListFormatError", "EdgeSplit", "Graph", "bfs_distances", "degree_stats",
    "load_edge_list", "split_edges", "write_edge_list",
    "PairSet", "SamplingStats", "extract_window_pairs", "random_walk",
    "random_walks", "read_pairs", "sample_neighborhood", "sample_pairs",
    "sample_ratio", "sampling_stats", "write_pairs", "write_walks",
    "EmbeddingTable", "NegativeSampler", "TrainConfig", "adagrad_step",
    "build_negative_sampler", "read_embeddings", "sgns_loss_grads",
    "train_pairs", "write_embeddings",
    "Vocabulary", "build_vocab", "load_node_texts", "preprocess_text",
    "write_node_texts",
    "EncoderConfig", "TextEncoderParams", "encode_all", "encode_node",
    "encode_unseen", "load_checkpoint", "save_checkpoint", "train_text_encoder",
    "EvalReport", "EvalTriple", "LRModel", "UnseenSplit", "auc_from_scores",
    "auc_lr", "auc_pair", "build_eval_triples", "build_zero_shot_triples",
    "evaluate", "load_word_vectors", "text_matching_embed", "train_logistic",
    "zero_shot_split",
    "stage_seed", "stage_rng",
]
