"""End-to-end build: corpora -> graph -> embeddings -> preference and
fusion weights -> aligned text encoder -> searchable snapshot.

Stage order and every random draw are pinned by the config seed, so a
rebuild from identical inputs produces a byte-identical snapshot.
"""

import logging

import numpy as np
from scipy.special import expit

from .embedding import (Activation, AggregationWeights, EmbeddingTable,
                        TrainConfig, _derive_seed, canonical_mean,
                        smooth_embeddings, train_tag2vec)
from .encoder import BiGruEncoder, Vocab, train_alignment
from .errors import TrainingDiverged
from .graph import (CategoryRecord, EdgeKind, HeteroGraph, NodeId, NodeKind,
                    PostRecord, build_graph, graph_digest, hashtag_words,
                    read_categories, read_posts, tokenize)
from .index import HashtagRecord, build_index
from .ranking import FusionLayer
from .snapshot import ModelSnapshot, config_hash

log = logging.getLogger(__name__)


def fused_user_preference(graph: HeteroGraph, vectors: np.ndarray,
                          table: EmbeddingTable, agg: AggregationWeights,
                          fusion: FusionLayer, user: NodeId,
                          activation: Activation) -> np.ndarray:
    """Eq-style fused preference for one user; cold sides contribute the
    zero vector."""
    from .ranking import fuse

    h_nbrs = graph.neighbors(user, EdgeKind.USER_HASHTAG)
    c_nbrs = graph.neighbors(user, EdgeKind.USER_CONTENT)
    d = table.dim
    if h_nbrs:
        mean_h = canonical_mean([vectors[table.row(n)] for n in h_nbrs])
        u_h = activation.apply(agg.w_hashtag @ mean_h)
    else:
        u_h = np.zeros(d)
    if c_nbrs:
        mean_c = canonical_mean([vectors[table.row(n)] for n in c_nbrs])
        u_c = activation.apply(agg.w_content @ mean_c)
    else:
        u_c = np.zeros(d)
    return fuse(fusion, u_c, u_h)


def train_preference(graph: HeteroGraph, vectors: np.ndarray,
                     table: EmbeddingTable, cfg: TrainConfig):
    """Fit aggregation and fusion weights so each user's fused preference
    scores their own hashtags above sampled negatives.

    Loss per user: -log sig(u.h+) summed over the user's hashtags, plus
    -log sig(-u.h-) over `negatives` uniform hashtag draws per positive.
    Embedding vectors stay frozen unless cfg.unfreeze_embeddings.
    Returns (AggregationWeights, FusionLayer, mean loss per epoch).
    """
    rng = np.random.default_rng(_derive_seed(cfg.seed, 1))
    d = cfg.dim
    act = cfg.activation
    agg = AggregationWeights.init(d, rng)
    fusion = FusionLayer.init(d, rng, act)
    n_users = graph.node_counts[NodeKind.USER]
    n_hashtags = graph.node_counts[NodeKind.HASHTAG]
    hash_offset = table.offsets[NodeKind.HASHTAG]
    lr = cfg.learning_rate
    losses = []
    step = 0

    for epoch in range(cfg.preference_epochs):
        total, count = 0.0, 0
        for u_ord in range(n_users):
            user = NodeId(NodeKind.USER, u_ord)
            h_nbrs = graph.neighbors(user, EdgeKind.USER_HASHTAG)
            if not h_nbrs:
                continue
            c_nbrs = graph.neighbors(user, EdgeKind.USER_CONTENT)

            h_rows = [table.row(n) for n in h_nbrs]
            mean_h = canonical_mean(vectors[h_rows])
            a_h = agg.w_hashtag @ mean_h
            u_h = act.apply(a_h)
            if c_nbrs:
                c_rows = [table.row(n) for n in c_nbrs]
                mean_c = canonical_mean(vectors[c_rows])
                a_c = agg.w_content @ mean_c
                u_c = act.apply(a_c)
            else:
                c_rows, mean_c, a_c, u_c = [], None, None, np.zeros(d)

            x = np.concatenate([u_c, u_h])
            a_f = fusion.w @ x + fusion.b
            u = act.apply(a_f)

            pos_rows = [hash_offset + n.ordinal for n in h_nbrs]
            neg_ords = rng.integers(0, n_hashtags,
                                    size=len(pos_rows) * cfg.negatives)
            neg_rows = hash_offset + neg_ords

            t_pos = vectors[pos_rows]
            t_neg = vectors[neg_rows]
            s_pos = t_pos @ u
            s_neg = t_neg @ u
            g_pos = expit(s_pos) - 1.0
            g_neg = expit(s_neg)
            d_u = g_pos @ t_pos + g_neg @ t_neg
            total += float(np.sum(np.logaddexp(0.0, -s_pos))
                           + np.sum(np.logaddexp(0.0, s_neg)))
            count += 1
            step += 1

            delta_f = d_u * act.derivative(a_f)
            dw_f = np.outer(delta_f, x)
            db_f = delta_f
            dx = fusion.w.T @ delta_f
            du_c, du_h = dx[:d], dx[d:]

            delta_h = du_h * act.derivative(a_h)
            dw_h = np.outer(delta_h, mean_h)
            if c_rows:
                delta_c = du_c * act.derivative(a_c)
                dw_c = np.outer(delta_c, mean_c)

            if cfg.unfreeze_embeddings:
                vectors[pos_rows] = t_pos - lr * np.outer(g_pos, u)
                vectors[neg_rows] = t_neg - lr * np.outer(g_neg, u)
                d_each_h = (agg.w_hashtag.T @ delta_h) / len(h_rows)
                for row in h_rows:
                    vectors[row] -= lr * d_each_h
                if c_rows:
                    d_each_c = (agg.w_content.T @ delta_c) / len(c_rows)
                    for row in c_rows:
                        vectors[row] -= lr * d_each_c

            fusion.w -= lr * dw_f
            fusion.b -= lr * db_f
            agg.w_hashtag -= lr * dw_h
            if c_rows:
                agg.w_content -= lr * dw_c

        for name, arr in (("w_hashtag", agg.w_hashtag),
                          ("w_content", agg.w_content),
                          ("fusion.w", fusion.w), ("fusion.b", fusion.b)):
            if not np.all(np.isfinite(arr)):
                raise TrainingDiverged("preference", step, name)
        losses.append(total / count if count else 0.0)
        log.info("preference epoch %d mean loss %.6f", epoch, losses[-1])
    return agg, fusion, losses


def build_snapshot(posts: list[PostRecord], categories: list[CategoryRecord],
                   cfg: TrainConfig) -> ModelSnapshot:
    """Run every training stage and assemble the persistable snapshot."""
    cfg.validate()
    graph = build_graph(posts, categories)
    digest = graph_digest(graph)
    table = train_tag2vec(graph, cfg)

    vectors = table.vectors
    if cfg.gcn_layers == 2:
        vectors = smooth_embeddings(graph, vectors, table)

    agg, fusion, _ = train_preference(graph, vectors, table, cfg)

    vocab = Vocab(graph.labels[NodeKind.WORD])
    word_block = vectors[table.kind_slice(NodeKind.WORD)]
    token_embeddings = np.vstack([np.zeros((2, cfg.dim)), word_block])
    enc_rng = np.random.default_rng(_derive_seed(cfg.seed, 2))
    encoder = BiGruEncoder.init(token_embeddings, cfg.dim // 2, enc_rng)

    docs, targets = [], []
    for h_ord, text in enumerate(graph.labels[NodeKind.HASHTAG]):
        ids = vocab.encode(hashtag_words(text))
        if ids:
            docs.append([ids])
            targets.append(vectors[table.row(NodeId(NodeKind.HASHTAG, h_ord))])
    for c_ord, cat in enumerate(graph.category_records):
        ids = vocab.encode(tokenize(cat.name))
        if ids:
            docs.append([ids])
            targets.append(vectors[table.row(NodeId(NodeKind.CATEGORY, c_ord))])
    if docs:
        align_losses = train_alignment(encoder, docs, np.asarray(targets),
                                       cfg.encoder_epochs, cfg.learning_rate)
        log.info("encoder alignment losses: %s",
                 ", ".join(f"{v:.5f}" for v in align_losses))

    n_users = graph.node_counts[NodeKind.USER]
    if n_users:
        prefs = [fused_user_preference(graph, vectors, table, agg, fusion,
                                       NodeId(NodeKind.USER, u), cfg.activation)
                 for u in range(n_users)]
        user_pref_mean = np.mean(prefs, axis=0)
    else:
        user_pref_mean = np.zeros(cfg.dim)

    records = []
    for h_ord, text in enumerate(graph.labels[NodeKind.HASHTAG]):
        records.append(HashtagRecord(
            id=h_ord, text=text,
            tokens=vocab.encode(hashtag_words(text)),
            timestamps=list(graph.hashtag_timestamps[h_ord]),
            node=NodeId(NodeKind.HASHTAG, h_ord)))
    index = build_index(records)

    category_record_ids = []
    for c_ord in range(graph.node_counts[NodeKind.CATEGORY]):
        nbrs = graph.neighbors(NodeId(NodeKind.CATEGORY, c_ord),
                               EdgeKind.HASHTAG_CATEGORY)
        category_record_ids.append(sorted(n.ordinal for n in nbrs))

    built_at = max((p.timestamp for p in posts), default=0)

    # Freeze every trained array to float32 so the in-memory snapshot and a
    # reloaded file score bit-identically.
    f32 = lambda a: np.ascontiguousarray(a, dtype=np.float32)
    for params in (encoder.word.forward, encoder.word.backward,
                   encoder.sentence.forward, encoder.sentence.backward):
        for name, arr in params.arrays().items():
            setattr(params, name, f32(arr))
    encoder.token_embeddings = f32(encoder.token_embeddings)

    return ModelSnapshot(
        digest=digest,
        cfg_hash=config_hash(cfg),
        built_at=built_at,
        dim=cfg.dim,
        kind_counts=graph.node_counts,
        embeddings=f32(vectors),
        agg=AggregationWeights(f32(agg.w_hashtag), f32(agg.w_content)),
        activation=cfg.activation,
        encoder=encoder,
        fusion=FusionLayer(f32(fusion.w), f32(fusion.b), cfg.activation),
        user_pref_mean=f32(user_pref_mean),
        vocab=vocab,
        categories=list(graph.category_records),
        category_record_ids=category_record_ids,
        index=index,
    )


def build_snapshot_from_files(posts_path, categories_path,
                              cfg: TrainConfig) -> ModelSnapshot:
    posts, rejects = read_posts(posts_path)
    for line_no, reason in rejects:
        log.warning("%s:%d rejected: %s", posts_path, line_no, reason)
    categories = read_categories(categories_path)
    return build_snapshot(posts, categories, cfg)
