"""Hierarchical bidirectional GRU text encoder.

Word level: token embeddings -> sentence vector (forward final state
concatenated with backward final state, dimension 2H). Sentence level: the
same bi-GRU contract applied over sentence vectors to yield a document
vector. The gate convention is pinned to

    z = sig(Wz x + Uz h + bz)
    r = sig(Wr x + Ur h + br)
    n = tanh(Wn x + r * (Un h) + bn)
    h' = (1 - z) * n + z * h

with the reset gate applied inside the candidate's recurrent term.
"""

import re
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit

from .errors import EmptySentence, TrainingDiverged

_SENTENCE_RE = re.compile(r"[.!?\n]+")

PAD_ID = 0
UNK_ID = 1


class Vocab:
    """Frozen token -> id mapping with PAD=0 and UNK=1 reserved."""

    def __init__(self, tokens: Sequence[str]):
        self.id_to_token = ["<pad>", "<unk>", *tokens]
        self.token_to_id = {t: i + 2 for i, t in enumerate(tokens)}

    def __len__(self):
        return len(self.id_to_token)

    def encode(self, tokens: Sequence[str]) -> list[int]:
        return [self.token_to_id.get(t, UNK_ID) for t in tokens]

    def decode(self, ids: Sequence[int]) -> list[str]:
        return [self.id_to_token[i] for i in ids]


@dataclass
class GruParams:
    """One direction's parameters: per gate an input matrix (H,E), a
    recurrent matrix (H,H) and a bias (H,)."""

    w_z: np.ndarray
    u_z: np.ndarray
    b_z: np.ndarray
    w_r: np.ndarray
    u_r: np.ndarray
    b_r: np.ndarray
    w_n: np.ndarray
    u_n: np.ndarray
    b_n: np.ndarray

    @classmethod
    def init(cls, input_dim: int, hidden_dim: int, rng: np.random.Generator,
             scale: Optional[float] = None):
        s = scale if scale is not None else 1.0 / np.sqrt(hidden_dim)
        def w():
            return rng.uniform(-s, s, (hidden_dim, input_dim))
        def u():
            return rng.uniform(-s, s, (hidden_dim, hidden_dim))
        def b():
            return np.zeros(hidden_dim)
        return cls(w(), u(), b(), w(), u(), b(), w(), u(), b())

    @property
    def input_dim(self) -> int:
        return self.w_z.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w_z.shape[0]

    def arrays(self) -> dict:
        return {"w_z": self.w_z, "u_z": self.u_z, "b_z": self.b_z,
                "w_r": self.w_r, "u_r": self.u_r, "b_r": self.b_r,
                "w_n": self.w_n, "u_n": self.u_n, "b_n": self.b_n}

    def zeros_like(self) -> dict:
        return {k: np.zeros_like(v) for k, v in self.arrays().items()}


def gru_step(p: GruParams, x: np.ndarray, h_prev: np.ndarray) -> np.ndarray:
    """One recurrence step under the pinned gate convention."""
    h, _ = gru_step_cached(p, x, h_prev)
    return h


def gru_step_cached(p: GruParams, x: np.ndarray, h_prev: np.ndarray):
    """Forward step returning the cache needed for the analytic backward."""
    if x.shape != (p.input_dim,) or h_prev.shape != (p.hidden_dim,):
        raise ValueError(f"expected x{(p.input_dim,)}, h{(p.hidden_dim,)}; "
                         f"got x{x.shape}, h{h_prev.shape}")
    z = expit(p.w_z @ x + p.u_z @ h_prev + p.b_z)
    r = expit(p.w_r @ x + p.u_r @ h_prev + p.b_r)
    rec = p.u_n @ h_prev
    n = np.tanh(p.w_n @ x + r * rec + p.b_n)
    h = (1.0 - z) * n + z * h_prev
    return h, (x, h_prev, z, r, rec, n)


def gru_step_backward(p: GruParams, cache, dh: np.ndarray, grads: dict):
    """Accumulate parameter gradients for one step; returns (dx, dh_prev).

    `grads` maps the GruParams array names to accumulators (see
    GruParams.zeros_like)."""
    x, h_prev, z, r, rec, n = cache
    dz = dh * (h_prev - n) * z * (1.0 - z)
    dn = dh * (1.0 - z) * (1.0 - n * n)
    dr = dn * rec * r * (1.0 - r)

    grads["w_z"] += np.outer(dz, x)
    grads["u_z"] += np.outer(dz, h_prev)
    grads["b_z"] += dz
    grads["w_r"] += np.outer(dr, x)
    grads["u_r"] += np.outer(dr, h_prev)
    grads["b_r"] += dr
    grads["w_n"] += np.outer(dn, x)
    grads["u_n"] += np.outer(dn * r, h_prev)
    grads["b_n"] += dn

    dx = p.w_z.T @ dz + p.w_r.T @ dr + p.w_n.T @ dn
    dh_prev = (dh * z + p.u_z.T @ dz + p.u_r.T @ dr + p.u_n.T @ (dn * r))
    return dx, dh_prev


class BiGru:
    """Forward + backward GRU over a sequence; output is the concatenation
    of the two final hidden states (dimension 2H)."""

    def __init__(self, forward: GruParams, backward: GruParams):
        if forward.hidden_dim != backward.hidden_dim or \
                forward.input_dim != backward.input_dim:
            raise ValueError("forward/backward GRU shapes must agree")
        self.forward = forward
        self.backward = backward

    @classmethod
    def init(cls, input_dim: int, hidden_dim: int, rng: np.random.Generator):
        return cls(GruParams.init(input_dim, hidden_dim, rng),
                   GruParams.init(input_dim, hidden_dim, rng))

    @property
    def out_dim(self) -> int:
        return 2 * self.forward.hidden_dim

    def encode(self, xs: np.ndarray) -> np.ndarray:
        out, _ = self.encode_cached(xs)
        return out

    def encode_cached(self, xs: np.ndarray):
        xs = np.asarray(xs, dtype=float)
        if xs.ndim != 2 or xs.shape[0] == 0:
            raise EmptySentence("cannot encode an empty sequence")
        h_f = np.zeros(self.forward.hidden_dim)
        f_caches = []
        for t in range(xs.shape[0]):
            h_f, cache = gru_step_cached(self.forward, xs[t], h_f)
            f_caches.append(cache)
        h_b = np.zeros(self.backward.hidden_dim)
        b_caches = []
        for t in range(xs.shape[0] - 1, -1, -1):
            h_b, cache = gru_step_cached(self.backward, xs[t], h_b)
            b_caches.append(cache)
        return np.concatenate([h_f, h_b]), (xs.shape, f_caches, b_caches)

    def backward_pass(self, caches, d_out: np.ndarray):
        """Backprop through time for a gradient on the concatenated output.

        Returns (forward grads, backward grads, d_inputs (T,E))."""
        (T, _), f_caches, b_caches = caches
        H = self.forward.hidden_dim
        gf, gb = self.forward.zeros_like(), self.backward.zeros_like()
        d_xs = np.zeros((T, self.forward.input_dim))

        dh = d_out[:H].copy()
        for t in range(T - 1, -1, -1):
            dx, dh = gru_step_backward(self.forward, f_caches[t], dh, gf)
            d_xs[t] += dx
        dh = d_out[H:].copy()
        for idx in range(T - 1, -1, -1):
            t = T - 1 - idx  # b_caches[idx] consumed input position T-1-idx
            dx, dh = gru_step_backward(self.backward, b_caches[idx], dh, gb)
            d_xs[t] += dx
        return gf, gb, d_xs


@dataclass
class BiGruEncoder:
    """Word-level bi-GRU over token embeddings plus a sentence-level bi-GRU
    over sentence vectors. Token embeddings are shared with the word-node
    rows of the embedding table (PAD and UNK map to zero)."""

    token_embeddings: np.ndarray  # (V, E); rows 0,1 are PAD/UNK zeros
    word: BiGru
    sentence: BiGru

    @classmethod
    def init(cls, token_embeddings: np.ndarray, hidden_dim: int,
             rng: np.random.Generator):
        e = token_embeddings.shape[1]
        word = BiGru.init(e, hidden_dim, rng)
        sentence = BiGru.init(2 * hidden_dim, hidden_dim, rng)
        return cls(np.asarray(token_embeddings, dtype=float), word, sentence)

    @property
    def out_dim(self) -> int:
        return self.sentence.out_dim


def encode_sentence(enc: BiGruEncoder, token_ids: Sequence[int]) -> np.ndarray:
    """Sentence vector: bi-GRU over the tokens' embedding rows."""
    if len(token_ids) == 0:
        raise EmptySentence("sentence has no tokens")
    xs = enc.token_embeddings[np.asarray(token_ids, dtype=int)]
    return enc.word.encode(xs)


def encode_document(enc: BiGruEncoder, sentence_vecs: Sequence[np.ndarray]) -> np.ndarray:
    """Document vector: the sentence-level bi-GRU over sentence vectors."""
    if len(sentence_vecs) == 0:
        raise EmptySentence("document has no sentences")
    return enc.sentence.encode(np.asarray(sentence_vecs, dtype=float))


def split_sentences(text: str) -> list[str]:
    return [s for s in (part.strip() for part in _SENTENCE_RE.split(text)) if s]


def encode_token_document(enc: BiGruEncoder,
                          sentences: Sequence[Sequence[int]]) -> np.ndarray:
    """Full hierarchy over pre-tokenized sentences; zero vector when empty."""
    vecs = [encode_sentence(enc, ids) for ids in sentences if len(ids)]
    if not vecs:
        return np.zeros(enc.out_dim)
    return encode_document(enc, vecs)


def train_alignment(enc: BiGruEncoder, docs: Sequence[Sequence[Sequence[int]]],
                    targets: np.ndarray, epochs: int, learning_rate: float) -> list[float]:
    """Fit both encoder levels so document vectors approach their targets.

    docs[i] is a list of token-id sentences; targets[i] the vector the
    document encoding should match (0.5 * L2 loss). Token embeddings stay
    frozen. Returns the mean loss per epoch.
    """
    losses = []
    step = 0
    for epoch in range(epochs):
        total, count = 0.0, 0
        for di, sentences in enumerate(docs):
            sentences = [s for s in sentences if len(s)]
            if not sentences:
                continue
            sent_caches = []
            sent_vecs = []
            for ids in sentences:
                xs = enc.token_embeddings[np.asarray(ids, dtype=int)]
                vec, cache = enc.word.encode_cached(xs)
                sent_vecs.append(vec)
                sent_caches.append(cache)
            doc_vec, doc_cache = enc.sentence.encode_cached(np.asarray(sent_vecs))

            diff = doc_vec - targets[di]
            total += 0.5 * float(diff @ diff)
            count += 1
            step += 1

            gf_s, gb_s, d_sent = enc.sentence.backward_pass(doc_cache, diff)
            word_grads = None
            for si in range(len(sentences)):
                gf_w, gb_w, _ = enc.word.backward_pass(sent_caches[si], d_sent[si])
                if word_grads is None:
                    word_grads = (gf_w, gb_w)
                else:
                    for k in gf_w:
                        word_grads[0][k] += gf_w[k]
                        word_grads[1][k] += gb_w[k]

            _apply_sgd(enc.sentence.forward, gf_s, learning_rate)
            _apply_sgd(enc.sentence.backward, gb_s, learning_rate)
            _apply_sgd(enc.word.forward, word_grads[0], learning_rate)
            _apply_sgd(enc.word.backward, word_grads[1], learning_rate)

        for params in (enc.word.forward, enc.word.backward,
                       enc.sentence.forward, enc.sentence.backward):
            for name, arr in params.arrays().items():
                if not np.all(np.isfinite(arr)):
                    raise TrainingDiverged("encoder alignment", step, name)
        losses.append(total / count if count else 0.0)
    return losses


def _apply_sgd(params: GruParams, grads: dict, lr: float) -> None:
    for name, g in grads.items():
        arr = getattr(params, name)
        arr -= lr * g
