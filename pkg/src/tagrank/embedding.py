"""Node embeddings: skip-gram training over typed walks plus
message-passing preference aggregation.

The aggregation computes phi(mean_j W h_j) over a node's neighbor vectors.
The mean is reduced in a canonical row order so that the result is exactly
permutation-invariant, bit for bit, in the neighbor ordering.
"""

import hashlib
import logging
import struct
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit

from .errors import EmptyNeighborhood, TrainingDiverged, UnknownNodeError
from .graph import EdgeKind, HeteroGraph, NodeId, NodeKind, random_walk

log = logging.getLogger(__name__)


class Activation(str, Enum):
    TANH = "tanh"
    RELU = "relu"
    IDENTITY = "identity"

    def apply(self, a: np.ndarray) -> np.ndarray:
        if self is Activation.TANH:
            return np.tanh(a)
        if self is Activation.RELU:
            return np.maximum(a, 0.0)
        return a

    def derivative(self, a: np.ndarray) -> np.ndarray:
        """d phi / d a, evaluated at pre-activation a."""
        if self is Activation.TANH:
            t = np.tanh(a)
            return 1.0 - t * t
        if self is Activation.RELU:
            return (a > 0.0).astype(float)
        return np.ones_like(a)


@dataclass
class TrainConfig:
    """Knobs for the embedding pipeline. All counts positive; window must
    not exceed walk_length; dim must be even (the text encoder splits it
    across two directions)."""

    dim: int = 32
    walks_per_node: int = 10
    walk_length: int = 10
    window: int = 5
    negatives: int = 5
    learning_rate: float = 0.025
    epochs: int = 5
    seed: int = 1

    # stage extensions beyond the walk trainer
    activation: Activation = Activation.TANH
    gcn_layers: int = 1                  # 1 or 2; 2 pre-smooths neighbor vectors
    negative_power: float = 0.0          # 0 = uniform; 0.75 = unigram^0.75
    preference_epochs: int = 5
    encoder_epochs: int = 5
    unfreeze_embeddings: bool = False    # let the preference stage update vectors

    def validate(self) -> None:
        for name in ("dim", "walks_per_node", "walk_length", "window",
                     "negatives", "epochs", "preference_epochs", "encoder_epochs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.window > self.walk_length:
            raise ValueError("window must not exceed walk_length")
        if self.dim % 2 != 0:
            raise ValueError("dim must be even")
        if self.gcn_layers not in (1, 2):
            raise ValueError("gcn_layers must be 1 or 2")


class EmbeddingTable:
    """Dense vectors per node, plus the skip-gram output-side vectors.

    Rows are laid out kind-major (User, Hashtag, Content, Word, Category),
    ordinal-ascending within a kind.
    """

    def __init__(self, dim: int, kind_counts: dict, vectors: np.ndarray,
                 context_vectors: Optional[np.ndarray] = None):
        self.dim = dim
        self.kind_counts = {k: int(kind_counts.get(k, 0)) for k in NodeKind}
        self.offsets = {}
        total = 0
        for k in NodeKind:
            self.offsets[k] = total
            total += self.kind_counts[k]
        self.total = total
        assert vectors.shape == (total, dim)
        self.vectors = vectors
        self.context_vectors = context_vectors

    @classmethod
    def init(cls, graph: HeteroGraph, dim: int, rng: np.random.Generator):
        """Uniform init in [-0.5/dim, 0.5/dim] for both vector tables."""
        counts = graph.node_counts
        total = sum(counts.values())
        lim = 0.5 / dim
        vectors = rng.uniform(-lim, lim, (total, dim))
        context = rng.uniform(-lim, lim, (total, dim))
        return cls(dim, counts, vectors, context)

    def row(self, n: NodeId) -> int:
        if not 0 <= n.ordinal < self.kind_counts[n.kind]:
            raise UnknownNodeError(f"node {n} outside table")
        return self.offsets[n.kind] + n.ordinal

    def vector(self, n: NodeId) -> np.ndarray:
        return self.vectors[self.row(n)]

    def kind_slice(self, kind: NodeKind) -> slice:
        start = self.offsets[kind]
        return slice(start, start + self.kind_counts[kind])

    def copy(self) -> "EmbeddingTable":
        ctx = None if self.context_vectors is None else self.context_vectors.copy()
        return EmbeddingTable(self.dim, self.kind_counts, self.vectors.copy(), ctx)

    def all_finite(self) -> bool:
        if not np.all(np.isfinite(self.vectors)):
            return False
        return self.context_vectors is None or np.all(np.isfinite(self.context_vectors))


@dataclass
class AggregationWeights:
    """Maps neighbor vectors into user preference space; one matrix for the
    hashtag side, one for the content side."""

    w_hashtag: np.ndarray  # (D, D)
    w_content: np.ndarray  # (D, D)

    @classmethod
    def init(cls, dim: int, rng: np.random.Generator):
        lim = 0.5 / dim
        return cls(rng.uniform(-lim, lim, (dim, dim)),
                   rng.uniform(-lim, lim, (dim, dim)))


def canonical_mean(neighbor_vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Mean over rows reduced in lexicographic row order.

    Floating-point addition is not associative, so a naive mean would leak
    the caller's ordering into the low bits; sorting first makes the
    aggregation exactly permutation-invariant.
    """
    arr = np.asarray(neighbor_vectors, dtype=float)
    if arr.ndim != 2:
        raise ValueError("neighbor vectors must be a sequence of 1-d vectors")
    order = np.lexsort(arr.T[::-1])
    return arr[order].sum(axis=0) / arr.shape[0]


def _aggregate(w: np.ndarray, neighbor_vectors, activation: Activation) -> np.ndarray:
    if len(neighbor_vectors) == 0:
        raise EmptyNeighborhood("cannot aggregate an empty neighbor set")
    mean = canonical_mean(neighbor_vectors)
    if w.shape[1] != mean.shape[0]:
        raise ValueError(f"weight shape {w.shape} does not match vector "
                         f"dimension {mean.shape[0]}")
    return activation.apply(w @ mean)


def aggregate_hashtag_preference(weights: AggregationWeights, neighbor_vectors,
                                 activation: Activation = Activation.TANH) -> np.ndarray:
    """phi((1/|H|) sum_j W_h h_j) over a user's hashtag-neighbor vectors."""
    return _aggregate(weights.w_hashtag, neighbor_vectors, activation)


def aggregate_content_preference(weights: AggregationWeights, neighbor_vectors,
                                 activation: Activation = Activation.TANH) -> np.ndarray:
    """Content-side analogue of the hashtag preference aggregation."""
    return _aggregate(weights.w_content, neighbor_vectors, activation)


def aggregate_backward(w: np.ndarray, neighbor_vectors, activation: Activation,
                       d_out: np.ndarray):
    """Gradients of the aggregation for a downstream gradient d_out.

    Returns (dW, d_neighbors) where d_neighbors is one gradient per input
    vector (each equal: the mean distributes uniformly).
    """
    mean = canonical_mean(neighbor_vectors)
    pre = w @ mean
    delta = d_out * activation.derivative(pre)
    dw = np.outer(delta, mean)
    d_each = (w.T @ delta) / len(neighbor_vectors)
    return dw, [d_each.copy() for _ in range(len(neighbor_vectors))]


# -- skip-gram ----------------------------------------------------------


def _log_sigmoid(x):
    # -log sigma(x) == logaddexp(0, -x); this returns log sigma(x), stable.
    return -np.logaddexp(0.0, -x)


def skipgram_loss_vectors(center: np.ndarray, context: np.ndarray,
                          negatives: np.ndarray) -> float:
    """-log sig(v.u_ctx) - sum_k log sig(-v.u_k) on raw vectors."""
    pos = float(center @ context)
    loss = -_log_sigmoid(pos)
    if len(negatives):
        neg = np.asarray(negatives) @ center
        loss += float(np.sum(-_log_sigmoid(-neg)))
    return float(loss)


def skipgram_grads_vectors(center, context, negatives):
    """Analytic gradients of skipgram_loss_vectors.

    Returns (loss, d_center, d_context, d_negatives).
    """
    pos = float(center @ context)
    g_pos = expit(pos) - 1.0
    d_center = g_pos * context
    d_context = g_pos * center
    negatives = np.asarray(negatives)
    if len(negatives):
        g_neg = expit(negatives @ center)  # sigma(v.u_k)
        d_center = d_center + g_neg @ negatives
        d_negatives = np.outer(g_neg, center)
    else:
        d_negatives = np.zeros((0, center.shape[0]))
    loss = skipgram_loss_vectors(center, context, negatives)
    return loss, d_center, d_context, d_negatives


def skipgram_loss(center: NodeId, context: NodeId, negatives: Sequence[NodeId],
                  table: EmbeddingTable) -> float:
    """Skip-gram negative-sampling loss for one (center, context) pair."""
    if table.context_vectors is None:
        raise ValueError("table has no context vectors")
    v = table.vectors[table.row(center)]
    u = table.context_vectors[table.row(context)]
    negs = table.context_vectors[[table.row(n) for n in negatives]]
    return skipgram_loss_vectors(v, u, negs)


# -- walk-corpus trainer --------------------------------------------------


def _derive_seed(base: int, *parts: int) -> int:
    payload = struct.pack(f"<Q{len(parts)}I", base & 0xFFFFFFFFFFFFFFFF, *parts)
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def build_walk_corpus(g: HeteroGraph, cfg: TrainConfig) -> list[list[NodeId]]:
    """walks_per_node deterministic walks from every node; drops length-1 walks."""
    corpus = []
    for node in g.iter_nodes():
        for j in range(cfg.walks_per_node):
            seed = _derive_seed(cfg.seed, int(node.kind), node.ordinal, j)
            walk = random_walk(g, node, cfg.walk_length, seed)
            if len(walk.nodes) > 1:
                corpus.append(walk.nodes)
    return corpus


def _negative_tables(g: HeteroGraph, corpus, power: float):
    """Per-kind sampling distribution for negatives: None means uniform."""
    if power <= 0.0:
        return {k: None for k in NodeKind}
    counts = {k: np.zeros(g.node_counts[k]) for k in NodeKind}
    for walk in corpus:
        for node in walk:
            counts[node.kind][node.ordinal] += 1.0
    tables = {}
    for k in NodeKind:
        c = counts[k]
        if c.sum() == 0:
            tables[k] = None
            continue
        p = (c + 1.0) ** power  # +1 smooths nodes absent from the corpus
        tables[k] = p / p.sum()
    return tables


def train_tag2vec(g: HeteroGraph, cfg: TrainConfig) -> EmbeddingTable:
    """SGD skip-gram with negative sampling over the walk corpus.

    Deterministic for a fixed (graph, cfg): walks are counter-hashed, the
    negative stream comes from one seeded generator consumed in a fixed
    iteration order, and updates run single-threaded.
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    table = EmbeddingTable.init(g, cfg.dim, rng)
    if g.num_nodes() == 0:
        return table

    corpus = build_walk_corpus(g, cfg)
    neg_tables = _negative_tables(g, corpus, cfg.negative_power)
    vec, ctx = table.vectors, table.context_vectors
    lr = cfg.learning_rate
    prev_mean = None
    step = 0
    for epoch in range(cfg.epochs):
        total, pairs = 0.0, 0
        for walk in corpus:
            rows = [table.row(n) for n in walk]
            for i, center_row in enumerate(rows):
                lo = max(0, i - cfg.window)
                hi = min(len(rows), i + cfg.window + 1)
                for j in range(lo, hi):
                    if j == i:
                        continue
                    ctx_node = walk[j]
                    kind_count = table.kind_counts[ctx_node.kind]
                    probs = neg_tables[ctx_node.kind]
                    if probs is None:
                        neg_ords = rng.integers(0, kind_count, size=cfg.negatives)
                    else:
                        neg_ords = rng.choice(kind_count, size=cfg.negatives, p=probs)
                    neg_rows = table.offsets[ctx_node.kind] + neg_ords

                    v = vec[center_row]
                    u_pos = ctx[rows[j]]
                    u_neg = ctx[neg_rows]

                    pos = float(v @ u_pos)
                    g_pos = expit(pos) - 1.0
                    neg = u_neg @ v
                    g_neg = expit(neg)

                    d_v = g_pos * u_pos + g_neg @ u_neg
                    ctx[rows[j]] = u_pos - lr * g_pos * v
                    ctx[neg_rows] = u_neg - lr * np.outer(g_neg, v)
                    vec[center_row] = v - lr * d_v

                    total += np.logaddexp(0.0, -pos) + np.sum(np.logaddexp(0.0, neg))
                    pairs += 1
                    step += 1
        if not table.all_finite():
            raise TrainingDiverged("tag2vec", step)
        mean = total / pairs if pairs else 0.0
        log.info("tag2vec epoch %d mean loss %.6f (%d pairs)", epoch, mean, pairs)
        if epoch < 3 and prev_mean is not None and mean > prev_mean + 1e-12:
            log.warning("tag2vec mean loss increased early: %.6f -> %.6f",
                        prev_mean, mean)
        prev_mean = mean
    return table


def smooth_embeddings(g: HeteroGraph, vectors: np.ndarray,
                      table: EmbeddingTable) -> np.ndarray:
    """One parameter-free smoothing round: each node becomes the mean of
    itself and all typed neighbors. Used when cfg.gcn_layers == 2 to widen
    the receptive field before preference aggregation."""
    out = vectors.copy()
    for node in g.iter_nodes():
        nbrs = g.all_neighbors(node)
        if not nbrs:
            continue
        row = table.row(node)
        acc = vectors[row].copy()
        for nb in nbrs:
            acc += vectors[table.row(nb)]
        out[row] = acc / (len(nbrs) + 1)
    return out
