"""Persisted model bundle: everything the query service needs.

Binary layout (all little-endian; documented in README):

    magic           8 bytes  b"TAGRANK\\x01"
    graph_digest    u64
    config_hash     u64
    built_at        i64      (max ingested post timestamp; 0 when no posts)
    dim             u32
    kind_counts     5 x u32  (user, hashtag, content, word, category)
    embeddings      total x dim float32, kind-major row order
    w_hashtag       dim x dim float32
    w_content       dim x dim float32
    activation      u8       (0 tanh, 1 relu, 2 identity)
    enc_input E     u32
    enc_hidden H    u32
    4 GRU blocks    word-fwd, word-bwd, sent-fwd, sent-bwd; each block is
                    w_z,u_z,b_z,w_r,u_r,b_r,w_n,u_n,b_n as float32
    fusion w        dim x 2*dim float32
    fusion b        dim float32
    user_pref_mean  dim float32
    vocab           u32 count, then per token u16 length + UTF-8 bytes
    categories      u32 count, then per record: str id, str name,
                    u8 has_parent, str parent (str = u16 length + UTF-8)
    cat record ids  per category: u32 count + u32 ids
    records         u32 count, then per record: u32 id, str text,
                    u32 node ordinal, u32 n_ts + i64 timestamps,
                    u32 n_tok + u32 token ids
    postings        u32 count, then per entry: u32 token id,
                    u32 length + u32 record ids

Float arrays are float32 on disk and in memory; score math upcasts to
float64, so a built snapshot and its reloaded copy score identically.
"""

import hashlib
import io
import json
import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .embedding import Activation, AggregationWeights, EmbeddingTable, TrainConfig
from .encoder import BiGru, BiGruEncoder, GruParams, Vocab, encode_token_document
from .errors import SnapshotFormatError
from .graph import CategoryRecord, NodeId, NodeKind, tokenize
from .index import HashtagRecord, InvertedIndex, build_index
from .ranking import FusionLayer

MAGIC = b"TAGRANK\x01"

_ACT_CODES = {Activation.TANH: 0, Activation.RELU: 1, Activation.IDENTITY: 2}
_ACT_FROM_CODE = {v: k for k, v in _ACT_CODES.items()}


def config_hash(cfg: TrainConfig) -> int:
    payload = json.dumps(
        {k: (v.value if isinstance(v, Activation) else v)
         for k, v in vars(cfg).items()},
        sort_keys=True).encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


@dataclass
class ModelSnapshot:
    digest: int
    cfg_hash: int
    built_at: int
    dim: int
    kind_counts: dict
    embeddings: np.ndarray          # float32 (total, dim)
    agg: AggregationWeights         # float32 matrices
    activation: Activation
    encoder: BiGruEncoder
    fusion: FusionLayer
    user_pref_mean: np.ndarray      # float32 (dim,)
    vocab: Vocab
    categories: list[CategoryRecord]
    category_record_ids: list[list[int]]
    index: InvertedIndex
    _record_vec_cache: dict = field(default_factory=dict, repr=False)
    _name_to_cat: Optional[dict] = field(default=None, repr=False)

    # -- row arithmetic ------------------------------------------------

    @property
    def table(self) -> EmbeddingTable:
        return EmbeddingTable(self.dim, self.kind_counts, self.embeddings)

    def node_vector(self, node: NodeId) -> np.ndarray:
        return np.asarray(self.table.vector(node), dtype=float)

    # -- category helpers ----------------------------------------------

    def category_ordinal_by_name(self, name: str) -> Optional[int]:
        """Lowest ordinal whose record name matches case-insensitively."""
        if self._name_to_cat is None:
            mapping = {}
            for i, cat in enumerate(self.categories):
                mapping.setdefault(cat.name.casefold(), i)
            self._name_to_cat = mapping
        return self._name_to_cat.get(name.casefold())

    def category_ordinal_by_id(self, cat_id: str) -> Optional[int]:
        for i, cat in enumerate(self.categories):
            if cat.id == cat_id:
                return i
        return None

    def category_tree(self) -> list[dict]:
        """Nested {id, name, children} list; roots sorted by id, children too."""
        by_id = {c.id: {"id": c.id, "name": c.name, "children": []}
                 for c in self.categories}
        roots = []
        for c in self.categories:
            node = by_id[c.id]
            if c.parent is not None and c.parent in by_id:
                by_id[c.parent]["children"].append(node)
            else:
                roots.append(node)
        def sort_rec(nodes):
            nodes.sort(key=lambda n: n["id"])
            for n in nodes:
                sort_rec(n["children"])
        sort_rec(roots)
        return roots

    # -- query-time vectors ---------------------------------------------

    def encode_text(self, text: str) -> np.ndarray:
        """Semantic document vector of free text (single sentence per
        newline/punctuation segment); zero when nothing tokenizes."""
        from .encoder import split_sentences
        sentences = [self.vocab.encode(tokenize(s)) for s in split_sentences(text)]
        sentences = [s for s in sentences if s]
        return encode_token_document(self.encoder, sentences)

    def keyword_vector(self, keyword: str, cat_ordinal: Optional[int]) -> np.ndarray:
        if cat_ordinal is not None:
            return self.node_vector(NodeId(NodeKind.CATEGORY, cat_ordinal))
        return self.encode_text(keyword)

    def record_vector(self, record_id: int) -> np.ndarray:
        """Query-side hashtag vector: mean of the node embedding and the
        semantic encoding of the hashtag text (cached)."""
        vec = self._record_vec_cache.get(record_id)
        if vec is None:
            rec = self.index.records[record_id]
            emb = self.node_vector(rec.node)
            enc = encode_token_document(self.encoder, [rec.tokens]) \
                if rec.tokens else np.zeros(self.dim)
            vec = (emb + enc) / 2.0
            self._record_vec_cache[record_id] = vec
        return vec

    def record_by_text(self, text: str) -> Optional[HashtagRecord]:
        for rid in sorted(self.index.records):
            if self.index.records[rid].text == text:
                return self.index.records[rid]
        return None

    # -- persistence -----------------------------------------------------

    def save(self, path) -> None:
        buf = io.BytesIO()
        w = _Writer(buf)
        w.raw(MAGIC)
        w.pack("<QQq", self.digest, self.cfg_hash, self.built_at)
        w.pack("<I", self.dim)
        w.pack("<5I", *(self.kind_counts[k] for k in NodeKind))
        w.f32(self.embeddings)
        w.f32(self.agg.w_hashtag)
        w.f32(self.agg.w_content)
        w.pack("<B", _ACT_CODES[self.activation])
        word = self.encoder.word
        sent = self.encoder.sentence
        w.pack("<II", word.forward.input_dim, word.forward.hidden_dim)
        for params in (word.forward, word.backward, sent.forward, sent.backward):
            for name in ("w_z", "u_z", "b_z", "w_r", "u_r", "b_r",
                         "w_n", "u_n", "b_n"):
                w.f32(getattr(params, name))
        w.f32(self.fusion.w)
        w.f32(self.fusion.b)
        w.f32(self.user_pref_mean)
        tokens = self.vocab.id_to_token[2:]
        w.pack("<I", len(tokens))
        for t in tokens:
            w.string(t)
        w.pack("<I", len(self.categories))
        for cat in self.categories:
            w.string(cat.id)
            w.string(cat.name)
            w.pack("<B", 0 if cat.parent is None else 1)
            if cat.parent is not None:
                w.string(cat.parent)
        for ids in self.category_record_ids:
            w.pack("<I", len(ids))
            w.pack(f"<{len(ids)}I", *ids)
        w.pack("<I", len(self.index.records))
        for rid in sorted(self.index.records):
            rec = self.index.records[rid]
            w.pack("<I", rec.id)
            w.string(rec.text)
            w.pack("<I", rec.node.ordinal)
            w.pack("<I", len(rec.timestamps))
            w.pack(f"<{len(rec.timestamps)}q", *rec.timestamps)
            w.pack("<I", len(rec.tokens))
            w.pack(f"<{len(rec.tokens)}I", *rec.tokens)
        w.pack("<I", len(self.index.postings))
        for tok in sorted(self.index.postings):
            ids = self.index.postings[tok]
            w.pack("<II", tok, len(ids))
            w.pack(f"<{len(ids)}I", *ids)
        with open(path, "wb") as fh:
            fh.write(buf.getvalue())

    @classmethod
    def load(cls, path) -> "ModelSnapshot":
        with open(path, "rb") as fh:
            data = fh.read()
        r = _Reader(data, path)
        if r.raw(8) != MAGIC:
            raise SnapshotFormatError(f"{path}: bad magic")
        digest, cfg_h, built_at = r.unpack("<QQq")
        (dim,) = r.unpack("<I")
        counts = dict(zip(NodeKind, r.unpack("<5I")))
        total = sum(counts.values())
        embeddings = r.f32((total, dim))
        agg = AggregationWeights(r.f32((dim, dim)), r.f32((dim, dim)))
        (act_code,) = r.unpack("<B")
        if act_code not in _ACT_FROM_CODE:
            raise SnapshotFormatError(f"{path}: unknown activation {act_code}")
        activation = _ACT_FROM_CODE[act_code]
        e, h = r.unpack("<II")
        blocks = []
        for level_input in (e, e, 2 * h, 2 * h):
            blocks.append(GruParams(
                r.f32((h, level_input)), r.f32((h, h)), r.f32((h,)),
                r.f32((h, level_input)), r.f32((h, h)), r.f32((h,)),
                r.f32((h, level_input)), r.f32((h, h)), r.f32((h,))))
        fusion = FusionLayer(r.f32((dim, 2 * dim)), r.f32((dim,)), activation)
        user_pref_mean = r.f32((dim,))
        (n_tokens,) = r.unpack("<I")
        vocab = Vocab([r.string() for _ in range(n_tokens)])
        (n_cats,) = r.unpack("<I")
        categories = []
        for _ in range(n_cats):
            cid = r.string()
            name = r.string()
            (has_parent,) = r.unpack("<B")
            parent = r.string() if has_parent else None
            categories.append(CategoryRecord(cid, name, parent))
        category_record_ids = []
        for _ in range(n_cats):
            (n,) = r.unpack("<I")
            category_record_ids.append(list(r.unpack(f"<{n}I")))
        (n_recs,) = r.unpack("<I")
        records = []
        for _ in range(n_recs):
            (rid,) = r.unpack("<I")
            text = r.string()
            (ordinal,) = r.unpack("<I")
            (n_ts,) = r.unpack("<I")
            timestamps = list(r.unpack(f"<{n_ts}q"))
            (n_tok,) = r.unpack("<I")
            tokens = list(r.unpack(f"<{n_tok}I"))
            records.append(HashtagRecord(rid, text, tokens, timestamps,
                                         NodeId(NodeKind.HASHTAG, ordinal)))
        index = build_index(records)
        (n_postings,) = r.unpack("<I")
        postings = {}
        for _ in range(n_postings):
            tok, n = r.unpack("<II")
            postings[tok] = list(r.unpack(f"<{n}I"))
        if postings != index.postings:
            raise SnapshotFormatError(f"{path}: postings do not match records")
        if not r.exhausted():
            raise SnapshotFormatError(f"{path}: trailing bytes")

        word_slice = slice(
            sum(counts[k] for k in NodeKind if k < NodeKind.WORD),
            sum(counts[k] for k in NodeKind if k <= NodeKind.WORD))
        token_embeddings = np.vstack([
            np.zeros((2, dim), dtype=np.float32), embeddings[word_slice]])
        encoder = BiGruEncoder(token_embeddings,
                               BiGru(blocks[0], blocks[1]),
                               BiGru(blocks[2], blocks[3]))
        return cls(digest, cfg_h, built_at, dim, counts, embeddings, agg,
                   activation, encoder, fusion, user_pref_mean, vocab,
                   categories, category_record_ids, index)


class _Writer:
    def __init__(self, buf):
        self.buf = buf

    def raw(self, b: bytes):
        self.buf.write(b)

    def pack(self, fmt, *vals):
        self.buf.write(struct.pack(fmt, *vals))

    def f32(self, arr: np.ndarray):
        self.buf.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())

    def string(self, s: str):
        b = s.encode("utf-8")
        if len(b) > 0xFFFF:
            raise SnapshotFormatError(f"string too long ({len(b)} bytes)")
        self.pack("<H", len(b))
        self.raw(b)


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.pos = 0
        self.path = path

    def raw(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise SnapshotFormatError(f"{self.path}: truncated snapshot")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        return struct.unpack(fmt, self.raw(struct.calcsize(fmt)))

    def f32(self, shape) -> np.ndarray:
        n = int(np.prod(shape))
        arr = np.frombuffer(self.raw(4 * n), dtype="<f4").reshape(shape)
        return arr.copy()

    def string(self) -> str:
        (n,) = self.unpack("<H")
        return self.raw(n).decode("utf-8")

    def exhausted(self) -> bool:
        return self.pos == len(self.data)
