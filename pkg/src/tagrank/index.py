"""In-process inverted index over hashtag records.

Stands in for an external search engine: token postings plus the per-
hashtag metadata (post counts, timestamps) that filtering and trending
need. Immutable after build; rebuilds produce a fresh index.
"""

from dataclasses import dataclass, field
from typing import Sequence

from .errors import IndexBuildError
from .graph import NodeId


@dataclass
class HashtagRecord:
    id: int
    text: str                 # with '#'
    tokens: list[int]         # vocab ids of the hashtag's own-text words
    timestamps: list[int]     # sorted epoch seconds, one per post
    node: NodeId

    @property
    def post_count(self) -> int:
        return len(self.timestamps)


@dataclass
class InvertedIndex:
    postings: dict[int, list[int]] = field(default_factory=dict)
    records: dict[int, HashtagRecord] = field(default_factory=dict)


def build_index(records: Sequence[HashtagRecord]) -> InvertedIndex:
    """Complete postings over the records; duplicate ids are a build error."""
    index = InvertedIndex()
    for rec in records:
        if rec.id in index.records:
            raise IndexBuildError(f"duplicate record id {rec.id}")
        index.records[rec.id] = rec
    postings: dict[int, set] = {}
    for rec in records:
        for tok in rec.tokens:
            postings.setdefault(tok, set()).add(rec.id)
    index.postings = {tok: sorted(ids) for tok, ids in sorted(postings.items())}
    return index


def lookup(index: InvertedIndex, query_tokens: Sequence[int], mode: str) -> list[int]:
    """Record ids matching the query tokens; 'any' = union, 'all' = intersection."""
    if not query_tokens:
        raise ValueError("query tokens must be non-empty")
    if mode not in ("any", "all"):
        raise ValueError(f"unknown lookup mode {mode!r}")
    sets = [set(index.postings.get(tok, ())) for tok in query_tokens]
    if mode == "any":
        result = set().union(*sets)
    else:
        result = sets[0]
        for s in sets[1:]:
            result &= s
    return sorted(result)


def index_to_json(index: InvertedIndex) -> dict:
    """JSON-friendly dump for debugging."""
    return {
        "postings": {str(tok): ids for tok, ids in index.postings.items()},
        "records": [
            {
                "id": rec.id,
                "text": rec.text,
                "tokens": list(rec.tokens),
                "post_count": rec.post_count,
                "timestamps": list(rec.timestamps),
                "node": {"kind": int(rec.node.kind), "ordinal": rec.node.ordinal},
            }
            for rec in (index.records[rid] for rid in sorted(index.records))
        ],
    }
