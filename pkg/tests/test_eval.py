"""Evaluation harness: paired AUC, internal logistic regression, text
matching, and the unseen-node split."""

import numpy as np
import pytest

from graphtext.evaluation import (EvalTriple, auc_from_scores, auc_lr,
                                  auc_pair, build_eval_triples,
                                  build_zero_shot_triples, evaluate,
                                  hadamard_features, load_word_vectors,
                                  text_matching_embed, train_logistic,
                                  zero_shot_split)
from graphtext.graph import Graph, split_edges


class TestAucFromScores:
    def test_clear_win(self):
        assert auc_from_scores([2.0], [1.0]) == 1.0

    def test_clear_loss(self):
        assert auc_from_scores([1.0], [2.0]) == 0.0

    def test_tie_counts_half(self):
        assert auc_from_scores([1.0], [1.0]) == 0.5

    def test_mixed(self):
        assert auc_from_scores([3.0, 1.0, 2.0], [1.0, 1.0, 5.0]) == \
            pytest.approx((1.0 + 0.5 + 0.0) / 3)

    def test_matches_brute_force(self):
        for seed in range(300):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(1, 30))
            pos = rng.integers(0, 5, size=n).astype(float)  # ints force ties
            neg = rng.integers(0, 5, size=n).astype(float)
            expected = sum(1.0 if p > q else 0.5 if p == q else 0.0
                           for p, q in zip(pos, neg)) / n
            assert auc_from_scores(pos, neg) == expected

    def test_antisymmetry(self):
        rng = np.random.default_rng(1)
        pos, neg = rng.normal(size=50), rng.normal(size=50)
        assert auc_from_scores(pos, neg) + auc_from_scores(neg, pos) == 1.0

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(2)
        pos, neg = rng.normal(size=40), rng.normal(size=40)
        base = auc_from_scores(pos, neg)
        assert auc_from_scores(3 * pos + 7, 3 * neg + 7) == base
        assert auc_from_scores(np.exp(pos), np.exp(neg)) == base

    def test_validation(self):
        with pytest.raises(ValueError):
            auc_from_scores([], [])
        with pytest.raises(ValueError, match="equal lengths"):
            auc_from_scores([1.0, 2.0], [1.0])

    def test_random_scores_near_half(self):
        rng = np.random.default_rng(3)
        auc = auc_from_scores(rng.normal(size=2000), rng.normal(size=2000))
        assert abs(auc - 0.5) < 0.05


class TestAucPair:
    def test_hand_example(self):
        emb = {0: np.array([1.0, 0.0]), 1: np.array([1.0, 0.0]),
               2: np.array([-1.0, 0.0])}
        triples = [EvalTriple(0, 1, 2)]  # scores 1 vs -1
        assert auc_pair(emb, triples) == 1.0

    def test_random_embeddings_near_half(self):
        rng = np.random.default_rng(4)
        emb = rng.normal(size=(600, 16))
        triples = []
        while len(triples) < 1200:
            c, p, n = rng.integers(600, size=3)
            if c != p and c != n and p != n:
                triples.append(EvalTriple(int(c), int(p), int(n)))
        assert abs(auc_pair(emb, triples) - 0.5) < 0.05


class TestTrainLogistic:
    def test_separates_linear_data(self):
        rng = np.random.default_rng(5)
        x_pos = rng.normal(loc=+2.0, size=(100, 3))
        x_neg = rng.normal(loc=-2.0, size=(100, 3))
        x = np.vstack([x_pos, x_neg])
        y = np.concatenate([np.ones(100), np.zeros(100)])
        model = train_logistic(x, y)
        p = model.predict_proba(x)
        assert np.mean((p > 0.5) == (y == 1)) > 0.97

    def test_label_flip_negates_model(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=(60, 4))
        y = (rng.random(60) > 0.5).astype(float)
        if y.sum() in (0, 60):
            y[0] = 1 - y[0]
        m1 = train_logistic(x, y)
        m2 = train_logistic(x, 1.0 - y)
        assert np.allclose(m1.weights, -m2.weights, atol=1e-9)
        assert m1.bias == pytest.approx(-m2.bias, abs=1e-9)

    def test_identical_features_predict_half(self):
        x = np.ones((10, 2))
        y = np.array([1.0, 0.0] * 5)
        model = train_logistic(x, y)
        assert model.predict_proba(x) == pytest.approx(0.5, abs=1e-6)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="each class"):
            train_logistic(np.ones((4, 2)), np.ones(4))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            train_logistic(np.ones((4, 2)), np.ones(3))

    def test_standardization_makes_scale_irrelevant(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(80, 3))
        y = (x[:, 0] > 0).astype(float)
        p1 = train_logistic(x, y).predict_proba(x)
        p2 = train_logistic(x * 1e-6, y).predict_proba(x * 1e-6)
        assert np.allclose(p1, p2, atol=1e-9)


class TestHadamard:
    def test_values(self):
        emb = {0: np.array([1.0, 2.0]), 1: np.array([3.0, 4.0]),
               2: np.array([5.0, 6.0])}
        pos, neg = hadamard_features(emb, [EvalTriple(0, 1, 2)])
        assert np.array_equal(pos, [[3.0, 8.0]])
        assert np.array_equal(neg, [[5.0, 12.0]])


class TestAucLR:
    def triples_and_embeddings(self, seed=8, n_nodes=80, n_triples=60):
        rng = np.random.default_rng(seed)
        emb = rng.normal(size=(n_nodes, 8))
        triples = []
        while len(triples) < n_triples:
            c, p, n = (int(v) for v in rng.integers(n_nodes, size=3))
            if len({c, p, n}) == 3:
                triples.append(EvalTriple(c, p, n))
        return emb, triples

    def test_matches_manual_pipeline(self):
        emb, triples = self.triples_and_embeddings()
        seed = 17
        # independent re-derivation of the documented protocol
        rng = np.random.default_rng(seed)
        order = rng.permutation(len(triples))
        n_fit = int(round(0.5 * len(triples)))
        n_fit = min(max(n_fit, 2), len(triples) - 2)
        fit = [triples[i] for i in order[:n_fit]]
        test = [triples[i] for i in order[n_fit:]]
        pos_fit, neg_fit = hadamard_features(emb, fit)
        model = train_logistic(np.concatenate([pos_fit, neg_fit]),
                               np.concatenate([np.ones(n_fit), np.zeros(n_fit)]))
        pos_test, neg_test = hadamard_features(emb, test)
        expected = auc_from_scores(model.predict_proba(pos_test),
                                   model.predict_proba(neg_test))
        assert auc_lr(emb, triples, seed=seed) == expected

    def test_too_few_triples_rejected(self):
        emb, triples = self.triples_and_embeddings(n_triples=3)
        with pytest.raises(ValueError, match="at least 4"):
            auc_lr(emb, triples)

    def test_split_fraction_validation(self):
        emb, triples = self.triples_and_embeddings()
        with pytest.raises(ValueError):
            auc_lr(emb, triples, split_fraction=1.0)

    def test_planted_structure_scores_high(self):
        # two communities with aligned embeddings: positives inside, negatives
        # across, so the (paired and LR) AUC must be far above chance
        rng = np.random.default_rng(9)
        centers = {0: rng.normal(size=8), 1: rng.normal(size=8)}
        emb = np.stack([centers[i % 2] + 0.1 * rng.normal(size=8)
                        for i in range(100)])
        triples = []
        for c in range(60):
            pos = c + 2 if c + 2 < 100 else c - 2       # same parity
            neg = c + 1 if c + 1 < 100 else c - 1       # other parity
            triples.append(EvalTriple(c, pos, neg))
        assert auc_pair(emb, triples) > 0.9
        assert auc_lr(emb, triples, seed=0) > 0.9

    def test_evaluate_report(self):
        emb, triples = self.triples_and_embeddings()
        report = evaluate(emb, triples, seed=1, config={"tag": "x"})
        assert report.triple_count == len(triples)
        assert report.auc_pair == auc_pair(emb, triples)
        rec = report.as_record()
        assert rec["tag"] == "x"
        assert rec["triples"] == len(triples)
        assert rec["auc_lr"] == round(report.auc_lr, 6)


def community_graph(seed=0):
    rng = np.random.default_rng(seed)
    edges = set()
    for base in (0, 15):
        for i in range(15):
            edges.add((base + i, base + (i + 1) % 15))
        while len([e for e in edges if min(e) >= base and max(e) < base + 15]) < 30:
            u, v = rng.integers(base, base + 15, size=2)
            if u != v:
                edges.add((min(int(u), int(v)), max(int(u), int(v))))
    edges.add((0, 15))
    return Graph([f"n{i}" for i in range(30)], sorted(edges))


class TestBuildEvalTriples:
    def test_invariants(self):
        g = community_graph()
        split = split_edges(g, 0.5, seed=3)
        triples = build_eval_triples(split, seed=4)
        held = set()
        for u, v in split.held_out:
            held.add((u, v))
            held.add((v, u))
        centers_with_held = {u for e in split.held_out for u in e}
        assert 0 < len(triples) <= len(centers_with_held)
        seen_centers = set()
        for t in triples:
            assert t.center not in seen_centers  # one triple per node
            seen_centers.add(t.center)
            assert (t.center, t.positive) in held
            assert not split.train_graph.has_edge(t.center, t.negative)
            assert (t.center, t.negative) not in held
            assert t.negative != t.center

    def test_deterministic(self):
        g = community_graph()
        split = split_edges(g, 0.5, seed=3)
        assert build_eval_triples(split, seed=4) == build_eval_triples(split, seed=4)

    def test_no_held_out_rejected(self):
        g = community_graph()
        split = split_edges(g, 1.0, seed=0)
        with pytest.raises(ValueError, match="held-out"):
            build_eval_triples(split, seed=0)

    def test_saturated_node_skipped(self):
        # triangle: every node adjacent to all others -> nothing to negate
        g = Graph(["a", "b", "c"], [(0, 1), (0, 2), (1, 2)])
        split = split_edges(g, 0.67, seed=1)
        with pytest.warns(UserWarning, match="adjacent to all"):
            triples = build_eval_triples(split, seed=2)
        assert triples == []


class TestTextMatching:
    def test_single_known_word(self):
        vecs = {"heart": np.array([1.0, 2.0]), "lung": np.array([3.0, 4.0])}
        out = text_matching_embed({0: ["heart"]}, vecs)
        assert np.array_equal(out[0], [1.0, 2.0])

    def test_mean_of_hits_ignores_oov(self):
        vecs = {"heart": np.array([1.0, 2.0]), "lung": np.array([3.0, 4.0])}
        out = text_matching_embed({0: ["heart", "zzz", "lung"]}, vecs)
        assert np.allclose(out[0], [2.0, 3.0])

    def test_all_oov_gets_zeros(self):
        vecs = {"heart": np.array([1.0, 2.0])}
        out = text_matching_embed({0: ["zzz", "qqq"]}, vecs)
        assert np.array_equal(out[0], [0.0, 0.0])

    def test_order_invariance(self):
        vecs = {"a": np.array([1.0]), "b": np.array([5.0])}
        fwd = text_matching_embed({0: ["a", "b"]}, vecs)
        rev = text_matching_embed({0: ["b", "a"]}, vecs)
        assert np.array_equal(fwd[0], rev[0])

    def test_load_word_vectors(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("heart 1.0 2.0\nlung 3.0 4.0\n")
        vecs = load_word_vectors(path)
        assert set(vecs) == {"heart", "lung"}
        assert np.array_equal(vecs["lung"], [3.0, 4.0])

    def test_load_word_vectors_malformed(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("heart\n")
        with pytest.raises(ValueError, match="expected"):
            load_word_vectors(path)


class TestZeroShotSplit:
    def path_graph(self, n=10):
        return Graph([f"n{i}" for i in range(n)],
                     [(i, i + 1) for i in range(n - 1)])

    def test_fraction_zero_is_identity(self):
        g = self.path_graph()
        split = zero_shot_split(g, 0.0, seed=0)
        assert split.train_graph == g
        assert split.removed == []
        assert split.survivor_index == {i: i for i in range(10)}

    def test_node_count_invariant(self):
        g = self.path_graph(10)
        split = zero_shot_split(g, 0.25, seed=1)
        assert len(split.removed) == int(np.ceil(0.25 * 10))  # 3
        assert split.train_graph.node_count == 10 - 3

    def test_ceil_rounding_small_fraction(self):
        g = self.path_graph(2211)
        split = zero_shot_split(g, 0.005, seed=2)
        assert len(split.removed) == 12  # ceil(11.055)

    def test_removed_absent_and_survivors_ordered(self):
        g = self.path_graph(10)
        split = zero_shot_split(g, 0.3, seed=3)
        removed_ids = {g.id_list[v] for v, _ in split.removed}
        assert removed_ids.isdisjoint(split.train_graph.id_list)
        survivors = [g.id_list[v] for v in sorted(split.survivor_index)]
        assert list(split.train_graph.id_list) == survivors

    def test_kept_edges_match_brute_force(self):
        rng = np.random.default_rng(4)
        edges = sorted({(int(u), int(v)) for u, v in rng.integers(0, 20, (60, 2))
                        if u < v})
        g = Graph([f"n{i}" for i in range(20)], edges)
        split = zero_shot_split(g, 0.2, seed=5)
        removed = {v for v, _ in split.removed}
        expected = {(split.survivor_index[u], split.survivor_index[v])
                    for u, v in g.edges()
                    if u not in removed and v not in removed}
        assert set(split.train_graph.edges()) == expected

    def test_removed_partners_recorded(self):
        g = self.path_graph(10)
        split = zero_shot_split(g, 0.2, seed=6)
        for v, partners in split.removed:
            assert sorted(partners) == sorted(int(x) for x in g.neighbors(v))

    def test_fraction_validation(self):
        with pytest.raises(ValueError):
            zero_shot_split(self.path_graph(), 1.0, seed=0)
        with pytest.raises(ValueError):
            zero_shot_split(self.path_graph(), -0.1, seed=0)

    def test_lift_embeddings_merges(self):
        g = self.path_graph(6)
        split = zero_shot_split(g, 0.34, seed=7)  # removes 2
        n_train = split.train_graph.node_count
        train_emb = np.arange(n_train * 2, dtype=float).reshape(n_train, 2)
        unseen = {v: np.full(2, 99.0) for v, _ in split.removed}
        lifted = split.lift_embeddings(train_emb, unseen)
        assert set(lifted) == set(range(6))
        for orig, tr in split.survivor_index.items():
            assert np.array_equal(lifted[orig], train_emb[tr])
        for v, _ in split.removed:
            assert np.array_equal(lifted[v], [99.0, 99.0])


class TestZeroShotTriples:
    def test_invariants(self):
        g = community_graph()
        split = zero_shot_split(g, 0.2, seed=8)
        triples = build_zero_shot_triples(split, g, seed=9, triples_per_node=2)
        removed = {v for v, _ in split.removed}
        adjacency = {v: set(int(x) for x in g.neighbors(v)) for v in removed}
        assert triples
        for t in triples:
            assert t.center in removed
            assert t.positive in adjacency[t.center]
            assert t.positive not in removed        # partner survived
            assert t.negative not in adjacency[t.center]
            assert t.negative != t.center

    def test_triples_per_node_cap(self):
        g = community_graph()
        split = zero_shot_split(g, 0.2, seed=10)
        singles = build_zero_shot_triples(split, g, seed=11, triples_per_node=1)
        many = build_zero_shot_triples(split, g, seed=11, triples_per_node=4)
        per_center = {}
        for t in many:
            per_center[t.center] = per_center.get(t.center, 0) + 1
        assert max(per_center.values()) <= 4
        assert len(many) >= len(singles)

    def test_isolated_removed_node_skipped(self):
        # removing both endpoints of an isolated edge leaves no surviving
        # partner for either; both must be skipped with a warning
        g = Graph(["a", "b", "c", "d"], [(0, 1), (2, 3)])
        rng_seed = next(s for s in range(100)
                        if sorted(v for v, _ in
                                  zero_shot_split(g, 0.5, seed=s).removed) == [0, 1])
        split = zero_shot_split(g, 0.5, seed=rng_seed)
        with pytest.warns(UserWarning, match="no surviving partner"):
            triples = build_zero_shot_triples(split, g, seed=0)
        assert triples == []

    def test_deterministic(self):
        g = community_graph()
        split = zero_shot_split(g, 0.2, seed=12)
        t1 = build_zero_shot_triples(split, g, seed=13, triples_per_node=3)
        t2 = build_zero_shot_triples(split, g, seed=13, triples_per_node=3)
        assert t1 == t2
