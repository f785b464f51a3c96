"""Command-line entry point.

One binary, subcommand style:

  split       hold out a fraction of edges for link prediction
  sample-ps   direct neighborhood pair sampling
  sample-rw   biased random walks -> window co-occurrence pairs
  stats       walk diagnostics (alpha / foreign-window exposure per node)
  ratio       closed-form walk-pairs vs direct-pairs volume ratio
  train       skip-gram negative sampling on a pairs file
  train-tge   train the text encoder end to end; writes checkpoint + embeddings
  eval        link-prediction AUCs from an embedding file
  zero-shot   remove nodes, encode them from text only, evaluate

Every file-writing run drops a ``<primary output>.run.json`` next to its
outputs with the fully resolved configuration and headline results, so any
artifact can be traced back to the exact invocation. Reports are TSV by
default (``--format json`` for JSON) and ship with PNG figures unless
``--no-figures`` is given. A master ``--seed`` fans out to per-stage seeds
via a splitmix-style derivation, so identical command lines reproduce
identical outputs in single-threaded mode.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import evaluation
from .encoder import (EncoderConfig, encode_all, encode_unseen, load_checkpoint,
                      save_checkpoint, train_text_encoder)
from .graph import (Graph, EdgeSplit, degree_stats, load_edge_list,
                    split_edges, write_edge_list)
from .sampling import (extract_window_pairs, random_walks, read_pairs,
                       sample_pairs, sample_ratio, sampling_stats, write_pairs,
                       write_walks)
from .seeds import stage_seed
from .text import build_vocab, load_node_texts, preprocess_text
from .training import TrainConfig, read_embeddings, train_pairs, write_embeddings


def _write_run_record(primary_out, args, result: dict) -> None:
    """Resolved config + headline results, next to the primary output."""
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    record = {"subcommand": args.func.__name__.removeprefix("_cmd_").replace("_", "-"),
              "config": cfg, "result": result}
    with open(f"{primary_out}.run.json", "w", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True, indent=2, default=str) + "\n")


def _stem(path) -> str:
    return os.path.splitext(str(path))[0]


def _report_lines(record: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(record, sort_keys=True, indent=2) + "\n"
    keys = list(record)
    head = "\t".join(keys)
    row = "\t".join(str(record[k]) for k in keys)
    return f"{head}\n{row}\n"


# -- subcommands -----------------------------------------------------------

def _cmd_split(args) -> int:
    g = load_edge_list(args.edges)
    split = split_edges(g, args.keep, stage_seed(args.seed, "split"))
    # node declarations keep nodes that lost all their edges in the universe
    write_edge_list(split.train_graph, args.out_train, declare_nodes=True)
    write_edge_list(g, args.out_held, edges=split.held_out)
    n_train = split.train_graph.edge_count
    print(f"kept {n_train} edges, held out {len(split.held_out)} "
          f"(of {g.edge_count}) over {g.node_count} nodes")
    _write_run_record(args.out_train, args,
                      {"train_edges": n_train, "held_out_edges": len(split.held_out),
                       "nodes": g.node_count})
    return 0


def _cmd_sample_ps(args) -> int:
    g = load_edge_list(args.edges)
    pairs = sample_pairs(g, args.order, args.reps,
                         stage_seed(args.seed, "sample-ps"), threads=args.threads)
    write_pairs(pairs, g, args.out)
    bound = 2 * args.reps * args.order * g.edge_count
    print(f"{len(pairs)} pairs (bound {bound}) -> {args.out}")
    _write_run_record(args.out, args, {"pairs": len(pairs), "bound": bound})
    return 0


def _cmd_sample_rw(args) -> int:
    g = load_edge_list(args.edges)
    walks = random_walks(g, args.walk_len, args.walks, args.p, args.q,
                         stage_seed(args.seed, "sample-rw"), threads=args.threads)
    pairs = extract_window_pairs(walks, args.window)
    write_pairs(pairs, g, args.out)
    if args.walks_out:
        write_walks(walks, g, args.walks_out)
    print(f"{len(walks)} walks -> {len(pairs)} pairs "
          f"({pairs.dropped_self_pairs} self pairs dropped) -> {args.out}")
    _write_run_record(args.out, args,
                      {"walks": len(walks), "pairs": len(pairs),
                       "dropped_self_pairs": pairs.dropped_self_pairs})
    return 0


def _cmd_stats(args) -> int:
    g = load_edge_list(args.edges)
    walks = random_walks(g, args.walk_len, args.walks, args.p, args.q,
                         stage_seed(args.seed, "stats"))
    st = sampling_stats(walks, args.window, args.walks, n_nodes=g.node_count)
    degrees = g.degrees()
    if args.format == "json":
        record = {"self_windows": st.self_windows,
                  "nodes": [{"node": g.id_list[v], "degree": int(degrees[v]),
                             "alpha": round(float(st.alpha[v]), 6),
                             "foreign_windows": int(st.foreign_windows[v])}
                            for v in range(g.node_count)]}
        body = json.dumps(record, indent=2) + "\n"
    else:
        lines = [f"# self_windows\t{st.self_windows}",
                 "node\tdegree\talpha\tforeign_windows"]
        for v in range(g.node_count):
            lines.append(f"{g.id_list[v]}\t{int(degrees[v])}"
                         f"\t{float(st.alpha[v]):.6f}\t{int(st.foreign_windows[v])}")
        body = "\n".join(lines) + "\n"
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(body)
    print(f"alpha mean {float(st.alpha.mean()):.3f} max {float(st.alpha.max()):.3f}; "
          f"{st.self_windows} self windows -> {args.out}")
    if not args.no_figures:
        from . import figures
        figures.save_alpha_histogram(st.alpha, f"{_stem(args.out)}_alpha.png")
        figures.save_degree_alpha_scatter(degrees, st.alpha,
                                          f"{_stem(args.out)}_degree_alpha.png")
    _write_run_record(args.out, args,
                      {"alpha_mean": round(float(st.alpha.mean()), 6),
                       "self_windows": st.self_windows})
    return 0


def _cmd_ratio(args) -> int:
    if (args.avg_degree is None) == (args.edges is None):
        raise ValueError("ratio needs exactly one of --avg-degree or --edges")
    if args.edges is not None:
        _, _, avg_degree = degree_stats(load_edge_list(args.edges))
    else:
        avg_degree = args.avg_degree
    value = sample_ratio(args.walk_len, args.window, args.walks,
                         args.reps, args.order, avg_degree)
    print(f"{value:g}")
    return 0


def _train_config(args, batch_size: int = 1) -> TrainConfig:
    return TrainConfig(dim=args.dim, epochs=args.epochs, learning_rate=args.lr,
                       l2=args.l2, n_neg=args.negatives,
                       seed=stage_seed(args.seed, "train"),
                       batch_size=batch_size, threads=getattr(args, "threads", 1))


def _cmd_train(args) -> int:
    g = load_edge_list(args.edges)
    pairs = read_pairs(args.pairs, g)
    cfg = _train_config(args, batch_size=args.batch_size)
    table, losses = train_pairs(pairs, g, cfg)
    write_embeddings(args.out, g, table.combined())
    print(f"trained {g.node_count} x {cfg.dim} embeddings on {len(pairs)} pairs; "
          f"final epoch loss {losses[-1]:.4f} -> {args.out}")
    if not args.no_figures:
        from . import figures
        figures.save_loss_curve(losses, f"{_stem(args.out)}_loss.png")
    _write_run_record(args.out, args,
                      {"pairs": len(pairs),
                       "epoch_losses": [round(x, 6) for x in losses]})
    return 0


def _node_tokens(g: Graph, raw_texts: dict[str, str]) -> dict[int, list[str]]:
    """Preprocessed tokens per graph node index; every node must have text."""
    out = {}
    for v in range(g.node_count):
        node_id = g.id_list[v]
        if node_id not in raw_texts:
            raise ValueError(f"no text for node {node_id!r}")
        out[v] = preprocess_text(raw_texts[node_id])
    return out


def _cmd_train_tge(args) -> int:
    g = load_edge_list(args.edges)
    pairs = read_pairs(args.pairs, g)
    raw_texts = load_node_texts(args.texts)
    tokens = _node_tokens(g, raw_texts)
    vocab = build_vocab(tokens.values())
    enc_cfg = EncoderConfig(char_dim=args.char_dim, char_hidden=args.char_hidden,
                            word_dim=args.word_dim, word_hidden=args.word_hidden,
                            dim=args.dim, max_len=args.max_len,
                            use_char=not args.no_char, use_word=not args.no_word,
                            pool=args.pool)
    cfg = _train_config(args)
    params, _, losses = train_text_encoder(g, tokens, pairs, cfg, enc_cfg, vocab)
    save_checkpoint(args.checkpoint, params, vocab)
    embedded = encode_all(tokens, vocab, params)
    vectors = np.stack([embedded[v] for v in range(g.node_count)])
    write_embeddings(args.out, g, vectors)
    print(f"encoder trained on {len(pairs)} pairs ({cfg.epochs} epochs); "
          f"final epoch loss {losses[-1]:.4f} -> {args.out}, {args.checkpoint}")
    if not args.no_figures:
        from . import figures
        figures.save_loss_curve(losses, f"{_stem(args.out)}_loss.png",
                                title="text encoder training loss")
    _write_run_record(args.out, args,
                      {"pairs": len(pairs), "vocab_words": vocab.n_words,
                       "vocab_chars": vocab.n_chars,
                       "epoch_losses": [round(x, 6) for x in losses]})
    return 0


def _load_split_files(train_path, held_path) -> EdgeSplit:
    """Rebuild an edge split from its two files.

    The node universe is the union of both files, indexed in first-appearance
    order (train file first), so held-out edges may touch nodes that are
    isolated in the training graph.
    """
    train_tokens = []
    held_tokens = []
    for path, sink in ((train_path, train_tokens), (held_path, held_tokens)):
        loaded = load_edge_list(path)
        sink.extend((loaded.id_list[u], loaded.id_list[v]) for u, v in loaded.edges())
    ids: list[str] = []
    id_map: dict[str, int] = {}
    for a, b in train_tokens + held_tokens:
        for tok in (a, b):
            if tok not in id_map:
                id_map[tok] = len(ids)
                ids.append(tok)
    train_edges = [(id_map[a], id_map[b]) for a, b in train_tokens]
    held = [(id_map[a], id_map[b]) for a, b in held_tokens]
    g = Graph(ids, train_edges)
    total = g.edge_count + len(held)
    return EdgeSplit(train_graph=g, held_out=held,
                     keep_fraction=g.edge_count / total if total else 1.0,
                     seed=-1)


def _embedding_matrix(g: Graph, table: dict[str, np.ndarray]) -> np.ndarray:
    rows = []
    for node_id in g.id_list:
        if node_id not in table:
            raise ValueError(f"missing embedding for node {node_id!r}")
        rows.append(table[node_id])
    mat = np.stack(rows)
    return mat


def _cmd_eval(args) -> int:
    split = _load_split_files(args.train_edges, args.held_edges)
    emb = _embedding_matrix(split.train_graph, read_embeddings(args.embeddings))
    triples = evaluation.build_eval_triples(split, stage_seed(args.seed, "eval-triples"))
    report = evaluation.evaluate(emb, triples, split_fraction=args.split_fraction,
                                 seed=stage_seed(args.seed, "eval-lr"),
                                 config={"embeddings": str(args.embeddings)})
    record = report.as_record()
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(_report_lines(record, args.format))
    print(f"AUC_pair {report.auc_pair:.4f}  AUC_LR {report.auc_lr:.4f}  "
          f"({report.triple_count} triples) -> {args.out}")
    if not args.no_figures:
        from . import figures
        pos = [float(emb[t.center] @ emb[t.positive]) for t in triples]
        neg = [float(emb[t.center] @ emb[t.negative]) for t in triples]
        figures.save_score_histogram(pos, neg, f"{_stem(args.out)}_scores.png")
    _write_run_record(args.out, args, record)
    return 0


def _cmd_zero_shot(args) -> int:
    if args.checkpoint is None and args.out_train is None:
        raise ValueError("zero-shot needs --checkpoint (evaluate) and/or "
                         "--out-train (write the reduced training graph)")
    if args.checkpoint is not None and args.texts is None:
        raise ValueError("zero-shot evaluation needs --texts")
    g = load_edge_list(args.edges)
    split = evaluation.zero_shot_split(g, args.fraction,
                                       stage_seed(args.seed, "zero-shot-split"))
    unseen_ids = [g.id_list[v] for v, _ in split.removed]
    if args.out_train is not None:
        write_edge_list(split.train_graph, args.out_train, declare_nodes=True)
        with open(f"{_stem(args.out_train)}_unseen.txt", "w", encoding="utf-8") as fh:
            for node_id in unseen_ids:
                fh.write(node_id + "\n")
        print(f"removed {len(unseen_ids)} nodes; train graph "
              f"{split.train_graph.node_count} nodes / "
              f"{split.train_graph.edge_count} edges -> {args.out_train}")
        _write_run_record(args.out_train, args,
                          {"removed_nodes": len(unseen_ids),
                           "train_edges": split.train_graph.edge_count})
    if args.checkpoint is None:
        return 0

    params, vocab = load_checkpoint(args.checkpoint)
    raw_texts = load_node_texts(args.texts)
    emb: dict[int, np.ndarray] = {}
    for v in range(g.node_count):
        node_id = g.id_list[v]
        if node_id not in raw_texts:
            raise ValueError(f"no text for node {node_id!r}")
        emb[v] = encode_unseen(raw_texts[node_id], vocab, params).embedding
    triples = evaluation.build_zero_shot_triples(
        split, g, stage_seed(args.seed, "zero-shot-triples"),
        triples_per_node=args.triples_per_node)
    if not triples:
        raise ValueError("no usable zero-shot triples (all removed nodes lost "
                         "every partner)")
    auc = evaluation.auc_pair(emb, triples)
    try:
        auc_lr = evaluation.auc_lr(emb, triples, split_fraction=args.split_fraction,
                                   seed=stage_seed(args.seed, "zero-shot-lr"))
    except ValueError:
        auc_lr = float("nan")
    record = {"auc_pair": round(auc, 6), "auc_lr": round(auc_lr, 6),
              "triples": len(triples), "removed_nodes": len(unseen_ids)}
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(_report_lines(record, args.format))
    print(f"zero-shot AUC_pair {auc:.4f} over {len(triples)} triples "
          f"({len(unseen_ids)} unseen nodes) -> {args.out}")
    if not args.no_figures:
        from . import figures
        pos = [float(emb[t.center] @ emb[t.positive]) for t in triples]
        neg = [float(emb[t.center] @ emb[t.negative]) for t in triples]
        figures.save_score_histogram(pos, neg, f"{_stem(args.out)}_scores.png",
                                     title="zero-shot link scores")
    _write_run_record(args.out, args, record)
    return 0


# -- argument wiring -------------------------------------------------------

def _add_trainer_flags(p: argparse.ArgumentParser, dim_default: int = 128) -> None:
    p.add_argument("--dim", type=int, default=dim_default, help="embedding dimension")
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.1, help="AdaGrad learning rate")
    p.add_argument("--l2", type=float, default=1e-5, help="L2 strength")
    p.add_argument("--negatives", type=int, default=5, help="negative samples per pair")


def _add_report_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p.add_argument("--no-figures", action="store_true",
                   help="skip PNG figures next to the report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphtext",
        description="Graph embeddings from pair sampling and text encoders.")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="subcommand")

    p = sub.add_parser("split", help="hold out a random fraction of edges")
    p.add_argument("edges", help="edge-list file: two ids per line")
    p.add_argument("--keep", type=float, default=0.5, help="fraction of edges kept")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-held", required=True)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("sample-ps", help="direct neighborhood pair sampling")
    p.add_argument("edges")
    p.add_argument("--order", type=int, default=2, help="maximum neighbor order")
    p.add_argument("--reps", type=int, default=10, help="repetitions per node")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="pairs file (center TAB neighbor)")
    p.set_defaults(func=_cmd_sample_ps)

    p = sub.add_parser("sample-rw", help="random walks -> window co-occurrence pairs")
    p.add_argument("edges")
    p.add_argument("--walk-len", type=int, default=80)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--walks", type=int, default=10, help="walks per node")
    p.add_argument("--p", type=float, default=1.0, help="return bias")
    p.add_argument("--q", type=float, default=1.0, help="in-out bias")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--walks-out", default=None, help="also dump raw walks")
    p.set_defaults(func=_cmd_sample_rw)

    p = sub.add_parser("stats", help="per-node walk exposure diagnostics")
    p.add_argument("edges")
    p.add_argument("--walk-len", type=int, default=80)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--walks", type=int, default=10)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_report_flags(p)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("ratio", help="walk-pair vs direct-pair volume ratio")
    p.add_argument("--walk-len", type=int, required=True)
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--walks", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--avg-degree", type=float, default=None)
    p.add_argument("--edges", default=None,
                   help="derive the average degree from this graph instead")
    p.set_defaults(func=_cmd_ratio)

    p = sub.add_parser("train", help="skip-gram negative sampling on a pairs file")
    p.add_argument("--pairs", required=True)
    p.add_argument("--edges", required=True,
                   help="training graph (node universe and degrees)")
    _add_trainer_flags(p)
    p.add_argument("--batch-size", type=int, default=1,
                   help="pairs per update; 1 reproduces the per-pair schedule")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="embedding file (word2vec text)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("train-tge", help="train the char+word text encoder")
    p.add_argument("--pairs", required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--texts", required=True, help="node_id TAB raw text")
    _add_trainer_flags(p)
    p.add_argument("--char-dim", type=int, default=16)
    p.add_argument("--char-hidden", type=int, default=32)
    p.add_argument("--word-dim", type=int, default=64)
    p.add_argument("--word-hidden", type=int, default=64)
    p.add_argument("--max-len", type=int, default=128, help="token truncation length")
    p.add_argument("--pool", choices=("mean", "final"), default="mean")
    p.add_argument("--no-char", action="store_true", help="ablate the character path")
    p.add_argument("--no-word", action="store_true", help="ablate the word path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="embedding file")
    p.add_argument("--checkpoint", required=True, help="encoder checkpoint (.npz)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=_cmd_train_tge)

    p = sub.add_parser("eval", help="link-prediction AUCs for an embedding file")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--train-edges", required=True)
    p.add_argument("--held-edges", required=True)
    p.add_argument("--split-fraction", type=float, default=0.5,
                   help="portion of triples used to fit the classifier")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_report_flags(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("zero-shot",
                       help="remove nodes, embed them from text, evaluate")
    p.add_argument("--edges", required=True, help="full graph before removal")
    p.add_argument("--fraction", type=float, default=0.005)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-train", default=None,
                   help="write the reduced training graph here (plus _unseen.txt)")
    p.add_argument("--texts", default=None)
    p.add_argument("--checkpoint", default=None, help="encoder checkpoint to evaluate")
    p.add_argument("--triples-per-node", type=int, default=1)
    p.add_argument("--split-fraction", type=float, default=0.5)
    p.add_argument("--out", default="zero_shot_report.tsv")
    _add_report_flags(p)
    p.set_defaults(func=_cmd_zero_shot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
