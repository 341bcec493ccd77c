"""Heterogeneous user-tagging behavior graph.

Builds a typed multigraph over user / hashtag / content / word / category
nodes from line-delimited post and category corpora, and samples
deterministic uniform random walks over it.
"""

import hashlib
import json
import re
import struct
from dataclasses import dataclass, field
from enum import IntEnum
from typing import NamedTuple, Optional, Sequence

from .errors import IngestionError, UnknownNodeError

WORD_WINDOW = 5  # co-occurrence window (in tokens) for word-word edges
MIN_TOKEN_LEN = 2


class NodeKind(IntEnum):
    USER = 0
    HASHTAG = 1
    CONTENT = 2
    WORD = 3
    CATEGORY = 4


class EdgeKind(IntEnum):
    USER_HASHTAG = 0
    USER_CONTENT = 1
    HASHTAG_CONTENT = 2
    HASHTAG_WORD = 3
    HASHTAG_CATEGORY = 4
    WORD_WORD = 5


# Node kinds each edge kind is allowed to connect (unordered).
EDGE_ENDPOINTS = {
    EdgeKind.USER_HASHTAG: frozenset({NodeKind.USER, NodeKind.HASHTAG}),
    EdgeKind.USER_CONTENT: frozenset({NodeKind.USER, NodeKind.CONTENT}),
    EdgeKind.HASHTAG_CONTENT: frozenset({NodeKind.HASHTAG, NodeKind.CONTENT}),
    EdgeKind.HASHTAG_WORD: frozenset({NodeKind.HASHTAG, NodeKind.WORD}),
    EdgeKind.HASHTAG_CATEGORY: frozenset({NodeKind.HASHTAG, NodeKind.CATEGORY}),
    EdgeKind.WORD_WORD: frozenset({NodeKind.WORD}),
}


class NodeId(NamedTuple):
    kind: NodeKind
    ordinal: int


_TOKEN_RE = re.compile(r"[0-9a-z]+")
_CAMEL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop tokens shorter than 2."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= MIN_TOKEN_LEN]


def hashtag_words(tag: str) -> list[str]:
    """Tokens of a hashtag's own text: strip '#', split camel-case segments,
    then apply the standard tokenizer."""
    body = tag.lstrip("#")
    return tokenize(_CAMEL_RE.sub(" ", body))


@dataclass
class PostRecord:
    id: str
    user: str
    text: str
    hashtags: list[str]
    timestamp: int


@dataclass
class CategoryRecord:
    id: str
    name: str
    parent: Optional[str] = None


@dataclass
class Walk:
    nodes: list[NodeId]
    seed: int


class HeteroGraph:
    """Immutable-after-build typed multigraph.

    Adjacency is stored symmetrically per edge kind; neighbor lists are
    duplicate-free and sorted by ordinal. Besides structure, the graph
    carries ingestion labels (user names, hashtag texts, content ids,
    words, category records) and per-hashtag post timestamps, which
    downstream stages need to assemble searchable records.
    """

    def __init__(self):
        self._adj: dict[EdgeKind, dict[NodeId, set]] = {k: {} for k in EdgeKind}
        self._frozen_adj: dict[EdgeKind, dict[NodeId, tuple]] = {}
        self._all_nbrs: dict[NodeId, tuple] = {}
        self.edge_counts: dict[EdgeKind, int] = {k: 0 for k in EdgeKind}
        self.labels: dict[NodeKind, list[str]] = {k: [] for k in NodeKind}
        self._label_index: dict[NodeKind, dict[str, int]] = {k: {} for k in NodeKind}
        self.category_records: list[CategoryRecord] = []
        self.hashtag_timestamps: list[list[int]] = []
        self._frozen = False

    # -- construction ------------------------------------------------

    def intern(self, kind: NodeKind, label: str) -> NodeId:
        """Return the node for `label`, creating it (dense ordinal) if new."""
        table = self._label_index[kind]
        ordinal = table.get(label)
        if ordinal is None:
            ordinal = len(self.labels[kind])
            table[label] = ordinal
            self.labels[kind].append(label)
            if kind is NodeKind.HASHTAG:
                self.hashtag_timestamps.append([])
        return NodeId(kind, ordinal)

    def add_edge(self, a: NodeId, b: NodeId, kind: EdgeKind) -> None:
        if {a.kind, b.kind} - EDGE_ENDPOINTS[kind] or (
            len({a.kind, b.kind}) < len(EDGE_ENDPOINTS[kind])
        ):
            raise ValueError(f"{kind.name} cannot connect {a.kind.name}-{b.kind.name}")
        if a == b:
            return  # no self-loops
        adj = self._adj[kind]
        fwd = adj.setdefault(a, set())
        if b in fwd:
            return
        fwd.add(b)
        adj.setdefault(b, set()).add(a)
        self.edge_counts[kind] += 1
        self._frozen = False

    def freeze(self) -> None:
        """Sort adjacency and precompute per-node all-kind neighbor tuples."""
        self._frozen_adj = {
            k: {n: tuple(sorted(nbrs)) for n, nbrs in adj.items()}
            for k, adj in self._adj.items()
        }
        self._all_nbrs = {}
        for node in self.iter_nodes():
            combined = []
            for k in EdgeKind:
                combined.extend(self._frozen_adj[k].get(node, ()))
            self._all_nbrs[node] = tuple(combined)
        self._frozen = True

    # -- queries -----------------------------------------------------

    @property
    def node_counts(self) -> dict[NodeKind, int]:
        return {k: len(v) for k, v in self.labels.items()}

    def num_nodes(self) -> int:
        return sum(len(v) for v in self.labels.values())

    def node_exists(self, n: NodeId) -> bool:
        return 0 <= n.ordinal < len(self.labels[n.kind])

    def _check_node(self, n: NodeId) -> None:
        if not self.node_exists(n):
            raise UnknownNodeError(f"unknown node {n}")

    def find(self, kind: NodeKind, label: str) -> Optional[NodeId]:
        ordinal = self._label_index[kind].get(label)
        return None if ordinal is None else NodeId(kind, ordinal)

    def label(self, n: NodeId) -> str:
        self._check_node(n)
        return self.labels[n.kind][n.ordinal]

    def iter_nodes(self):
        for kind in NodeKind:
            for ordinal in range(len(self.labels[kind])):
                yield NodeId(kind, ordinal)

    def neighbors(self, n: NodeId, kind: EdgeKind) -> tuple:
        """Sorted duplicate-free neighbors of `n` under `kind`."""
        self._check_node(n)
        if not self._frozen:
            self.freeze()
        return self._frozen_adj[kind].get(n, ())

    def all_neighbors(self, n: NodeId) -> tuple:
        """Neighbors under every edge kind, concatenated in EdgeKind order."""
        self._check_node(n)
        if not self._frozen:
            self.freeze()
        return self._all_nbrs.get(n, ())

    def iter_edges(self):
        """Yield (kind, u, v) with u <= v, sorted canonically."""
        if not self._frozen:
            self.freeze()
        for kind in EdgeKind:
            seen = []
            for u, nbrs in self._frozen_adj[kind].items():
                for v in nbrs:
                    if u <= v:
                        seen.append((u, v))
            seen.sort()
            for u, v in seen:
                yield kind, u, v

    # -- testing constructor ------------------------------------------

    @classmethod
    def from_edges(cls, node_counts: dict, edges: Sequence) -> "HeteroGraph":
        """Build a graph from explicit node counts and (kind, u, v) triples.

        Labels are synthesized as '<kind>:<ordinal>'. Intended for synthetic
        fixtures, not ingestion.
        """
        g = cls()
        for kind, count in node_counts.items():
            for i in range(count):
                g.intern(kind, f"{kind.name.lower()}:{i}")
        for kind, u, v in edges:
            g.add_edge(u, v, kind)
        g.freeze()
        return g


# -- ingestion ---------------------------------------------------------


def _require(cond, path, line_no, reason):
    if not cond:
        raise IngestionError(path, line_no, reason)


def read_posts(path) -> tuple[list[PostRecord], list[tuple[int, str]]]:
    """Parse a line-delimited posts file.

    Returns (records, rejects). Structural problems (bad JSON, missing or
    ill-typed fields) raise IngestionError naming file and line; a hashtag
    missing its '#' prefix rejects just that record and parsing continues.
    """
    records, rejects = [], []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestionError(path, line_no, f"bad JSON: {exc.msg}") from exc
            _require(isinstance(raw, dict), path, line_no, "record is not an object")
            for key, typ in (("id", str), ("user", str), ("text", str),
                             ("hashtags", list), ("timestamp", int)):
                _require(key in raw, path, line_no, f"missing field '{key}'")
                _require(isinstance(raw[key], typ) and not isinstance(raw[key], bool),
                         path, line_no, f"field '{key}' must be {typ.__name__}")
            for h in raw["hashtags"]:
                _require(isinstance(h, str), path, line_no, "hashtags must be strings")
            bad = [h for h in raw["hashtags"] if not h.startswith("#")]
            if bad:
                rejects.append((line_no, f"hashtag without '#': {bad[0]!r}"))
                continue
            records.append(PostRecord(raw["id"], raw["user"], raw["text"],
                                      list(raw["hashtags"]), raw["timestamp"]))
    return records, rejects


def read_categories(path) -> list[CategoryRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestionError(path, line_no, f"bad JSON: {exc.msg}") from exc
            _require(isinstance(raw, dict), path, line_no, "record is not an object")
            for key in ("id", "name"):
                _require(isinstance(raw.get(key), str), path, line_no,
                         f"field '{key}' must be str")
            parent = raw.get("parent")
            _require(parent is None or isinstance(parent, str), path, line_no,
                     "field 'parent' must be str or null")
            records.append(CategoryRecord(raw["id"], raw["name"], parent))
    return records


def category_match_name(name: str) -> str:
    """Normalized category name used for hashtag-category matching."""
    return " ".join(tokenize(name))


def build_graph(posts: Sequence[PostRecord],
                categories: Sequence[CategoryRecord],
                extra_users: Sequence[str] = ()) -> HeteroGraph:
    """Build the behavior graph from parsed corpora.

    Edge rules:
      user-hashtag      user used the hashtag in at least one post
      user-content      user authored the content
      hashtag-content   hashtag annotates the content
      hashtag-word      word occurs in the hashtag's own text, or in a
                        content the hashtag annotates
      hashtag-category  a word of the hashtag's own text matches the
                        normalized category name exactly or by substring
      word-word         co-occurrence within a 5-token window in one content

    Contents carry ingestion-supplied string ids; a post id seen before is
    skipped entirely, which makes ingestion idempotent.
    """
    g = HeteroGraph()
    for user in extra_users:
        g.intern(NodeKind.USER, user)

    seen_posts = set()
    for post in posts:
        if post.id in seen_posts:
            continue
        seen_posts.add(post.id)

        user = g.intern(NodeKind.USER, post.user)
        content = g.intern(NodeKind.CONTENT, post.id)
        g.add_edge(user, content, EdgeKind.USER_CONTENT)

        tokens = tokenize(post.text)
        word_nodes = [g.intern(NodeKind.WORD, t) for t in tokens]
        for i in range(len(word_nodes)):
            for j in range(i + 1, min(i + WORD_WINDOW, len(word_nodes))):
                if word_nodes[i] != word_nodes[j]:
                    g.add_edge(word_nodes[i], word_nodes[j], EdgeKind.WORD_WORD)

        for tag in dict.fromkeys(post.hashtags):
            hnode = g.intern(NodeKind.HASHTAG, tag)
            g.hashtag_timestamps[hnode.ordinal].append(post.timestamp)
            g.add_edge(user, hnode, EdgeKind.USER_HASHTAG)
            g.add_edge(hnode, content, EdgeKind.HASHTAG_CONTENT)
            for w in hashtag_words(tag):
                g.add_edge(hnode, g.intern(NodeKind.WORD, w), EdgeKind.HASHTAG_WORD)
            for wnode in word_nodes:
                g.add_edge(hnode, wnode, EdgeKind.HASHTAG_WORD)

    for cat in categories:
        g.intern(NodeKind.CATEGORY, cat.id)
        g.category_records.append(cat)

    for cat_ord, cat in enumerate(g.category_records):
        cnode = NodeId(NodeKind.CATEGORY, cat_ord)
        name = category_match_name(cat.name)
        if not name:
            continue
        for h_ord, tag in enumerate(g.labels[NodeKind.HASHTAG]):
            for w in hashtag_words(tag):
                if w == name or w in name or name in w:
                    g.add_edge(NodeId(NodeKind.HASHTAG, h_ord), cnode,
                               EdgeKind.HASHTAG_CATEGORY)
                    break

    for ts in g.hashtag_timestamps:
        ts.sort()
    g.freeze()
    return g


# -- walks and digest ---------------------------------------------------


def _counter_choice(seed: int, step: int, node: NodeId, n: int) -> int:
    """Uniform index in [0, n) from a counter-based hash of (seed, step, node)."""
    payload = struct.pack("<QIBI", seed & 0xFFFFFFFFFFFFFFFF, step,
                          int(node.kind), node.ordinal)
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little") % n


def random_walk(g: HeteroGraph, start: NodeId, length: int, seed: int) -> Walk:
    """Uniform walk over the union of all typed neighbor lists.

    Deterministic given (graph, start, length, seed): the step-`i` choice
    is a counter-based hash, independent of any RNG state. Terminates early
    at a node with no neighbors.
    """
    g._check_node(start)
    if length < 1:
        raise ValueError("walk length must be positive")
    nodes = [start]
    current = start
    for step in range(1, length):
        nbrs = g.all_neighbors(current)
        if not nbrs:
            break
        current = nbrs[_counter_choice(seed, step, current, len(nbrs))]
        nodes.append(current)
    return Walk(nodes=nodes, seed=seed)


def graph_digest(g: HeteroGraph) -> int:
    """64-bit checksum over the canonically sorted edge list."""
    h = hashlib.blake2b(digest_size=8)
    for kind, u, v in g.iter_edges():
        h.update(struct.pack("<BBIBI", int(kind), int(u.kind), u.ordinal,
                             int(v.kind), v.ordinal))
    return int.from_bytes(h.digest(), "little")
