"""tagrank: behavior-graph hashtag embeddings with ranked retrieval.

Pipeline: ingest post/category corpora into a typed behavior graph, train
skip-gram embeddings over random walks, fit preference aggregation and
fusion weights, align a hierarchical bi-GRU text encoder, then serve
ranked, filterable hashtag recommendations per category keyword.
"""

from .embedding import (Activation, AggregationWeights, EmbeddingTable,
                        TrainConfig, aggregate_content_preference,
                        aggregate_hashtag_preference, skipgram_loss,
                        train_tag2vec)
from .encoder import BiGruEncoder, GruParams, Vocab, encode_document, \
    encode_sentence, gru_step
from .errors import TagRankError
from .graph import (EdgeKind, HeteroGraph, NodeId, NodeKind, Walk,
                    build_graph, graph_digest, random_walk, tokenize)
from .gradcheck import GradCheckOp, grad_check
from .index import HashtagRecord, InvertedIndex, build_index, lookup
from .pipeline import build_snapshot, build_snapshot_from_files
from .ranking import (FusionLayer, RankingOptions, ScoredHashtag, fuse,
                      rank_hashtags, similarity, trending)
from .snapshot import ModelSnapshot

__version__ = "0.1.0"

__all__ = [
    "Activation", "AggregationWeights", "BiGruEncoder", "EdgeKind",
    "EmbeddingTable", "FusionLayer", "GradCheckOp", "GruParams",
    "HashtagRecord", "HeteroGraph", "InvertedIndex", "ModelSnapshot",
    "NodeId", "NodeKind", "RankingOptions", "ScoredHashtag", "TagRankError",
    "TrainConfig", "Vocab", "Walk", "aggregate_content_preference",
    "aggregate_hashtag_preference", "build_graph", "build_index",
    "build_snapshot", "build_snapshot_from_files", "encode_document",
    "encode_sentence", "fuse", "grad_check", "graph_digest", "gru_step",
    "lookup", "random_walk", "rank_hashtags", "similarity", "skipgram_loss",
    "tokenize", "train_tag2vec", "trending",
]
