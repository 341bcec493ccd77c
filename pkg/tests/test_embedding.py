import numpy as np
import numpy.testing as npt
import pytest

from tagrank.embedding import (Activation, AggregationWeights, EmbeddingTable,
                               TrainConfig, aggregate_content_preference,
                               aggregate_hashtag_preference, canonical_mean,
                               skipgram_loss, skipgram_loss_vectors,
                               train_tag2vec)
from tagrank.errors import EmptyNeighborhood
from tagrank.graph import EdgeKind, HeteroGraph, NodeId, NodeKind


def _weights(w_h, w_c=None):
    w_h = np.asarray(w_h, dtype=float)
    w_c = w_h if w_c is None else np.asarray(w_c, dtype=float)
    return AggregationWeights(w_h, w_c)


def two_clique_graph(n_per_clique: int = 10) -> HeteroGraph:
    """Two word cliques joined by a single bridge edge."""
    edges = []
    n = n_per_clique
    for block in (range(n), range(n, 2 * n)):
        block = list(block)
        for i in range(len(block)):
            for j in range(i + 1, len(block)):
                edges.append((EdgeKind.WORD_WORD,
                              NodeId(NodeKind.WORD, block[i]),
                              NodeId(NodeKind.WORD, block[j])))
    edges.append((EdgeKind.WORD_WORD, NodeId(NodeKind.WORD, 0),
                  NodeId(NodeKind.WORD, n)))
    return HeteroGraph.from_edges({NodeKind.WORD: 2 * n}, edges)


class TestAggregation:
    def test_single_neighbor_identity(self):
        out = aggregate_hashtag_preference(_weights(np.eye(2)),
                                           [np.array([0.3, -0.2])],
                                           Activation.IDENTITY)
        npt.assert_array_equal(out, [0.3, -0.2])

    def test_mean_of_basis_vectors_relu(self):
        out = aggregate_hashtag_preference(
            _weights(np.eye(2)), [np.array([1.0, 0.0]), np.array([0.0, 1.0])],
            Activation.RELU)
        npt.assert_array_equal(out, [0.5, 0.5])

    def test_tanh_reference_value(self):
        # phi(mean_j W h_j) with W=[[1,2],[3,4]], h in {e1,e2} -> tanh([1.5,3.5])
        out = aggregate_hashtag_preference(
            _weights([[1.0, 2.0], [3.0, 4.0]]),
            [np.array([1.0, 0.0]), np.array([0.0, 1.0])], Activation.TANH)
        npt.assert_allclose(out, np.tanh([1.5, 3.5]), rtol=0, atol=1e-15)
        npt.assert_allclose(out, [0.90514825, 0.99817790], atol=1e-8)

    def test_content_zero_weights(self):
        out = aggregate_content_preference(
            _weights(np.eye(2), np.zeros((2, 2))), [np.array([1.0, 1.0])],
            Activation.TANH)
        npt.assert_array_equal(out, [0.0, 0.0])

    def test_content_direct_mean(self):
        out = aggregate_content_preference(
            _weights(np.eye(2)),
            [np.array([2.0, 0.0]), np.array([0.0, 2.0]), np.array([2.0, 2.0])],
            Activation.IDENTITY)
        npt.assert_allclose(out, [4.0 / 3.0, 4.0 / 3.0], rtol=1e-15)

    def test_permutation_invariance_exact(self):
        rng = np.random.default_rng(5)
        vecs = rng.normal(size=(7, 5))
        w = rng.normal(size=(5, 5))
        base = aggregate_hashtag_preference(_weights(w), vecs, Activation.TANH)
        for _ in range(100):
            perm = rng.permutation(7)
            out = aggregate_hashtag_preference(_weights(w), vecs[perm],
                                               Activation.TANH)
            npt.assert_array_equal(out, base)  # bit-for-bit

    def test_scale_property_identity(self):
        rng = np.random.default_rng(6)
        vecs = rng.normal(size=(4, 3))
        w = rng.normal(size=(3, 3))
        base = aggregate_hashtag_preference(_weights(w), vecs,
                                            Activation.IDENTITY)
        for alpha in (0.5, 2.0, -3.25, 10.0):
            out = aggregate_hashtag_preference(_weights(w), alpha * vecs,
                                               Activation.IDENTITY)
            npt.assert_allclose(out, alpha * base, rtol=1e-12)

    def test_empty_neighborhood_signals(self):
        with pytest.raises(EmptyNeighborhood):
            aggregate_hashtag_preference(_weights(np.eye(2)), [],
                                         Activation.TANH)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            aggregate_hashtag_preference(_weights(np.eye(3)),
                                         [np.zeros(2)], Activation.TANH)

    def test_canonical_mean_matches_plain_mean(self):
        rng = np.random.default_rng(7)
        vecs = rng.normal(size=(9, 4))
        npt.assert_allclose(canonical_mean(vecs), vecs.mean(axis=0), rtol=1e-12)


class TestSkipgramLoss:
    def test_all_zero_vectors(self):
        k = 4
        loss = skipgram_loss_vectors(np.zeros(3), np.zeros(3), np.zeros((k, 3)))
        npt.assert_allclose(loss, (1 + k) * np.log(2.0), rtol=1e-15)

    def test_logistic_asymptote(self):
        # positive term below 1e-4 once the dot product reaches 10
        big = np.zeros(4)
        big[0] = 10.0
        e1 = np.zeros(4)
        e1[0] = 1.0
        loss = skipgram_loss_vectors(big, e1, np.zeros((0, 4)))
        assert loss < 1e-4

    def test_reference_value_one_negative(self):
        v = np.array([1.0, 0.0])
        loss = skipgram_loss_vectors(v, v.copy(), np.array([[-1.0, 0.0]]))
        npt.assert_allclose(loss, 2.0 * np.log1p(np.exp(-1.0)), rtol=1e-14)
        npt.assert_allclose(loss, 0.6265233750364456, rtol=1e-12)

    def test_node_level_wrapper(self):
        g = two_clique_graph(2)
        rng = np.random.default_rng(0)
        table = EmbeddingTable.init(g, 4, rng)
        a, b = NodeId(NodeKind.WORD, 0), NodeId(NodeKind.WORD, 1)
        negs = [NodeId(NodeKind.WORD, 2), NodeId(NodeKind.WORD, 3)]
        expected = skipgram_loss_vectors(
            table.vectors[table.row(a)], table.context_vectors[table.row(b)],
            table.context_vectors[[table.row(n) for n in negs]])
        npt.assert_allclose(skipgram_loss(a, b, negs, table), expected)


class TestTrainConfig:
    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            TrainConfig(epochs=0).validate()

    def test_rejects_window_beyond_walk(self):
        with pytest.raises(ValueError):
            TrainConfig(window=20, walk_length=10).validate()

    def test_rejects_odd_dim(self):
        with pytest.raises(ValueError):
            TrainConfig(dim=7).validate()


class TestTrainTag2vec:
    def test_zero_edge_graph_keeps_init(self):
        g = HeteroGraph.from_edges({NodeKind.WORD: 5, NodeKind.USER: 2}, [])
        cfg = TrainConfig(dim=4, walks_per_node=2, walk_length=3, window=2,
                          negatives=2, epochs=2, seed=9)
        table = train_tag2vec(g, cfg)
        fresh = EmbeddingTable.init(g, 4, np.random.default_rng(9))
        npt.assert_array_equal(table.vectors, fresh.vectors)
        npt.assert_array_equal(table.context_vectors, fresh.context_vectors)

    def test_deterministic(self):
        g = two_clique_graph(4)
        cfg = TrainConfig(dim=6, walks_per_node=2, walk_length=5, window=2,
                          negatives=2, epochs=2, seed=21)
        t1 = train_tag2vec(g, cfg)
        t2 = train_tag2vec(g, cfg)
        npt.assert_array_equal(t1.vectors, t2.vectors)
        npt.assert_array_equal(t1.context_vectors, t2.context_vectors)

    def test_all_finite_after_training(self):
        g = two_clique_graph(5)
        cfg = TrainConfig(dim=8, walks_per_node=3, walk_length=6, window=3,
                          negatives=3, epochs=3, seed=4)
        assert train_tag2vec(g, cfg).all_finite()

    def test_two_clique_separation(self):
        g = two_clique_graph(10)
        cfg = TrainConfig(dim=16, walks_per_node=8, walk_length=10, window=4,
                          negatives=4, learning_rate=0.05, epochs=20, seed=1)
        table = train_tag2vec(g, cfg)
        intra, inter = clique_cosines(table, 10)
        assert intra > inter

    def test_unigram_power_option_runs(self):
        g = two_clique_graph(3)
        cfg = TrainConfig(dim=4, walks_per_node=2, walk_length=4, window=2,
                          negatives=2, epochs=1, seed=5, negative_power=0.75)
        assert train_tag2vec(g, cfg).all_finite()


def clique_cosines(table, n_per_clique):
    vecs = table.vectors
    norm = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
    sims = norm @ norm.T
    n = n_per_clique
    intra, inter = [], []
    for i in range(2 * n):
        for j in range(i + 1, 2 * n):
            same = (i < n) == (j < n)
            (intra if same else inter).append(sims[i, j])
    return float(np.mean(intra)), float(np.mean(inter))
