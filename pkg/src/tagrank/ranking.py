"""Scoring and ordering of hashtags for a category keyword.

Similarity = fused-user-preference . keyword  +  hashtag . keyword, where
the fusion is a fully connected layer over the concatenated (content,
hashtag) preference vectors. Final order comes from a weighted mix of
min-max-normalized similarity, popularity (log post count) and trend.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .embedding import Activation
from .encoder import UNK_ID
from .errors import QueryError
from .graph import tokenize

WEIGHT_SUM_EPS = 1e-9  # tolerance when validating rerank weight sums


@dataclass
class FusionLayer:
    """Fully connected combiner: phi(W . concat(u_content, u_hashtag) + b)."""

    w: np.ndarray  # (D, 2D)
    b: np.ndarray  # (D,)
    activation: Activation = Activation.TANH

    @classmethod
    def init(cls, dim: int, rng: np.random.Generator,
             activation: Activation = Activation.TANH):
        lim = 0.5 / dim
        return cls(rng.uniform(-lim, lim, (dim, 2 * dim)),
                   rng.uniform(-lim, lim, dim), activation)

    @property
    def dim(self) -> int:
        return self.w.shape[0]


def fuse(layer: FusionLayer, u_content: np.ndarray, u_hashtag: np.ndarray) -> np.ndarray:
    """phi(W [u_content; u_hashtag] + b); concatenation order (content, hashtag)."""
    u_content = np.asarray(u_content, dtype=float)
    u_hashtag = np.asarray(u_hashtag, dtype=float)
    d = layer.dim
    if u_content.shape != (d,) or u_hashtag.shape != (d,):
        raise ValueError(f"expected two {(d,)} vectors, got "
                         f"{u_content.shape} and {u_hashtag.shape}")
    x = np.concatenate([u_content, u_hashtag])
    return layer.activation.apply(layer.w @ x + layer.b)


def fuse_backward(layer: FusionLayer, u_content, u_hashtag, d_out):
    """Gradients of fuse wrt (W, b, u_content, u_hashtag) for downstream d_out."""
    x = np.concatenate([np.asarray(u_content, float), np.asarray(u_hashtag, float)])
    pre = layer.w @ x + layer.b
    delta = d_out * layer.activation.derivative(pre)
    dw = np.outer(delta, x)
    db = delta
    dx = layer.w.T @ delta
    d = layer.dim
    return dw, db, dx[:d], dx[d:]


def similarity(u_hashtag_pref: np.ndarray, u_content_pref: np.ndarray,
               hashtag_vec: np.ndarray, keyword_vec: np.ndarray,
               layer: FusionLayer) -> float:
    """Fused user preference dotted with the keyword, plus the direct
    hashtag-keyword term (keeps hashtags rankable without user context)."""
    fused = fuse(layer, u_content_pref, u_hashtag_pref)
    return float(fused @ keyword_vec + np.asarray(hashtag_vec) @ keyword_vec)


@dataclass
class RankingOptions:
    top_n: int
    min_post_count: Optional[int] = None
    max_post_count: Optional[int] = None
    trend_window: Optional[tuple[int, int]] = None
    rerank_weights: tuple[float, float, float] = (0.6, 0.3, 0.1)

    def __post_init__(self):
        if self.top_n < 0:
            raise ValueError("top_n must be >= 0")
        if (self.min_post_count is not None and self.max_post_count is not None
                and self.min_post_count > self.max_post_count):
            raise ValueError("min_post_count must not exceed max_post_count")
        w = self.rerank_weights
        if len(w) != 3 or any(x < 0 for x in w):
            raise ValueError("rerank_weights must be three non-negative reals")
        if abs(sum(w) - 1.0) > WEIGHT_SUM_EPS:
            raise ValueError("rerank_weights must sum to 1")
        if self.trend_window is not None:
            lo, hi = self.trend_window
            if lo >= hi:
                raise ValueError("trend window start must precede end")


@dataclass
class ScoredHashtag:
    hashtag: str
    similarity: float
    rerank_score: float
    post_count: int
    index_ref: int


def trending(timestamps: Sequence[int], window: tuple[int, int]) -> float:
    """Relative growth between the window's halves.

    The window is half-open [start, end); its halves split at the float
    midpoint: first = [start, mid), second = [mid, end).
    """
    start, end = window
    if start >= end:
        raise ValueError("trend window start must precede end")
    mid = start + (end - start) / 2.0
    first = sum(1 for t in timestamps if start <= t < mid)
    second = sum(1 for t in timestamps if mid <= t < end)
    return (second - first) / max(1, first)


def trend_histogram(timestamps: Sequence[int], window: tuple[int, int],
                    buckets: int = 10) -> list[int]:
    """Counts per equal-width bucket over the half-open window."""
    start, end = window
    if start >= end:
        raise ValueError("trend window start must precede end")
    width = (end - start) / buckets
    counts = [0] * buckets
    for t in timestamps:
        if start <= t < end:
            idx = min(int((t - start) / width), buckets - 1)
            counts[idx] += 1
    return counts


def minmax_normalize(values: np.ndarray) -> np.ndarray:
    """Min-max to [0,1]; a constant vector maps to all zeros."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return values
    lo, hi = values.min(), values.max()
    if hi <= lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def rank_hashtags(keyword: str, opts: RankingOptions, snapshot,
                  index=None, fallback_to_all: bool = True) -> list[ScoredHashtag]:
    """Ranked, filtered hashtags for a keyword.

    Keyword vector: the category node's embedding when the keyword exactly
    names a category (case-insensitive), else the semantic encoding of the
    keyword text. Candidates: token-postings union with the matched
    category's edge-linked hashtags; when both are empty the candidate set
    falls back to every record (similarity alone discriminates) unless
    `fallback_to_all` is off, in which case the result is empty. Then the
    post-count filter applies, and scores are min-max normalized per
    component over the filtered candidate set. Ties break on ascending
    hashtag string.
    """
    from .index import lookup  # local import avoids a module cycle

    if index is None:
        index = snapshot.index
    tokens = tokenize(keyword)
    if not tokens:
        raise QueryError(f"keyword {keyword!r} has no usable tokens")

    cat_ord = snapshot.category_ordinal_by_name(keyword)
    keyword_vec = snapshot.keyword_vector(keyword, cat_ord)

    token_ids = [t for t in snapshot.vocab.encode(tokens) if t != UNK_ID]
    candidates = set(lookup(index, token_ids, "any")) if token_ids else set()
    if cat_ord is not None:
        candidates |= set(snapshot.category_record_ids[cat_ord])
    if not candidates:
        if not fallback_to_all:
            return []
        candidates = set(index.records)

    lo, hi = opts.min_post_count, opts.max_post_count
    kept = []
    for rid in sorted(candidates):
        rec = index.records[rid]
        if lo is not None and rec.post_count < lo:
            continue
        if hi is not None and rec.post_count > hi:
            continue
        kept.append(rec)
    if not kept:
        return []

    sims = np.array([
        float(snapshot.user_pref_mean @ keyword_vec
              + snapshot.record_vector(rec.id) @ keyword_vec)
        for rec in kept
    ])
    pops = np.array([math.log1p(rec.post_count) for rec in kept])
    if opts.trend_window is not None:
        trends = np.array([trending(rec.timestamps, opts.trend_window)
                           for rec in kept])
    else:
        trends = np.zeros(len(kept))

    w_sim, w_pop, w_trend = opts.rerank_weights
    rerank = (w_sim * minmax_normalize(sims)
              + w_pop * minmax_normalize(pops)
              + w_trend * minmax_normalize(trends))

    rows = [ScoredHashtag(rec.text, float(sims[i]), float(rerank[i]),
                          rec.post_count, rec.id)
            for i, rec in enumerate(kept)]
    rows.sort(key=lambda r: (-r.rerank_score, r.hashtag))
    return rows[:opts.top_n]
