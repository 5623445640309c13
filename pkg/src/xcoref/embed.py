"""Span and context vector assembly.

Three vector sources feed the mention representation:

* a static word-vector store (text file, fixed during training),
* a contextual per-token vector store (precomputed file, or a deterministic
  seeded-hash fallback for hermetic runs),
* a trainable character-level LSTM encoding of the span surface.

A mention vector is [context ; span ; dependency] where span is
[word-level ; char-level]; the dependency part is computed in deps.py.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .corpus import Corpus, Mention

CTX_MAGIC = b"XCORefCTX1"


def _seeded_unit_vector(key: str, dim: int, seed: int = 0) -> np.ndarray:
    """Deterministic pseudo-random unit vector for a string key."""
    digest = hashlib.blake2b(f"{seed}|{key}".encode(), digest_size=8).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "little"))
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


class StaticVectorStore:
    """word -> vector; lookups are case-folded then exact; OOV -> zero vector."""

    def __init__(self, table: dict[str, np.ndarray], dim: int):
        self.dim = dim
        self.table: dict[str, np.ndarray] = {}
        for word, vec in table.items():
            vec = np.asarray(vec, dtype=np.float64)
            if vec.shape != (dim,):
                raise ValueError(f"vector for {word!r} has shape {vec.shape}, want ({dim},)")
            # first entry wins when case-folding collides
            self.table.setdefault(word.casefold(), vec)
        self.oov_vector = np.zeros(dim)

    def lookup(self, word: str) -> np.ndarray:
        return self.table.get(word.casefold(), self.oov_vector)

    def __contains__(self, word: str) -> bool:
        return word.casefold() in self.table

    @classmethod
    def load(cls, path) -> "StaticVectorStore":
        table: dict[str, np.ndarray] = {}
        dim = None
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                word, _, rest = line.rstrip("\n").partition("\t")
                vec = np.array([float(x) for x in rest.split()])
                if dim is None:
                    dim = len(vec)
                table[word] = vec
        if dim is None:
            raise ValueError(f"{path}: empty vector file")
        return cls(table, dim)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for word, vec in self.table.items():
                fh.write(word + "\t" + " ".join(repr(float(x)) for x in vec) + "\n")

    @classmethod
    def hashed(cls, vocab, dim: int, seed: int = 0) -> "StaticVectorStore":
        """Deterministic store for tests and hermetic runs."""
        return cls({w: _seeded_unit_vector("word|" + w, dim, seed) for w in vocab}, dim)


class ContextVectorStore:
    """(doc_id, sent_idx, tok_idx) -> contextual vector of the token."""

    def __init__(self, table: dict[tuple[str, int, int], np.ndarray], dim: int):
        self.dim = dim
        self.table = {k: np.asarray(v, dtype=np.float64) for k, v in table.items()}
        for k, v in self.table.items():
            if v.shape != (dim,):
                raise ValueError(f"context vector for {k} has shape {v.shape}, want ({dim},)")

    def get(self, doc_id: str, sent_idx: int, tok_idx: int) -> np.ndarray:
        key = (doc_id, sent_idx, tok_idx)
        if key not in self.table:
            raise KeyError(f"no contextual vector for token {key}")
        return self.table[key]

    def covers(self, corpus: Corpus) -> bool:
        return all((m.doc_id, m.sent_idx, m.head_idx) in self.table
                   for m in corpus.mentions.values())

    # binary format: magic, dim (u32), count (u64), then per record
    # u16 doc_id length + utf-8 bytes, u32 sent_idx, u32 tok_idx, float32*dim
    def save_binary(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(CTX_MAGIC)
            fh.write(struct.pack("<IQ", self.dim, len(self.table)))
            for (doc_id, sent_idx, tok_idx), vec in self.table.items():
                raw = doc_id.encode("utf-8")
                fh.write(struct.pack("<H", len(raw)))
                fh.write(raw)
                fh.write(struct.pack("<II", sent_idx, tok_idx))
                fh.write(np.asarray(vec, dtype=np.float32).tobytes())

    @classmethod
    def load_binary(cls, path) -> "ContextVectorStore":
        with open(path, "rb") as fh:
            magic = fh.read(len(CTX_MAGIC))
            if magic != CTX_MAGIC:
                raise ValueError(f"{path}: not a contextual vector file (bad magic)")
            dim, count = struct.unpack("<IQ", fh.read(12))
            table = {}
            for _ in range(count):
                (dlen,) = struct.unpack("<H", fh.read(2))
                doc_id = fh.read(dlen).decode("utf-8")
                sent_idx, tok_idx = struct.unpack("<II", fh.read(8))
                vec = np.frombuffer(fh.read(4 * dim), dtype=np.float32).astype(np.float64)
                table[(doc_id, sent_idx, tok_idx)] = vec
        return cls(table, dim)

    def save_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for (doc_id, sent_idx, tok_idx), vec in self.table.items():
                fh.write(json.dumps({"doc_id": doc_id, "sent_idx": sent_idx,
                                     "tok_idx": tok_idx,
                                     "vector": [float(x) for x in vec]}))
                fh.write("\n")

    @classmethod
    def load_jsonl(cls, path) -> "ContextVectorStore":
        table = {}
        dim = None
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                o = json.loads(line)
                vec = np.asarray(o["vector"], dtype=np.float64)
                dim = len(vec) if dim is None else dim
                table[(o["doc_id"], o["sent_idx"], o["tok_idx"])] = vec
        if dim is None:
            raise ValueError(f"{path}: empty contextual store")
        return cls(table, dim)

    @classmethod
    def hashed(cls, corpus: Corpus, dim: int, seed: int = 0) -> "ContextVectorStore":
        """Deterministic fallback: seeded hash of (doc, sent, tok) -> unit vector."""
        table = {}
        for doc in corpus.documents.values():
            for si, sent in enumerate(doc.sentences):
                for ti in range(len(sent)):
                    key = f"ctx|{doc.doc_id}|{si}|{ti}"
                    table[(doc.doc_id, si, ti)] = _seeded_unit_vector(key, dim, seed)
        return cls(table, dim)


# -- character-level recurrent encoder -------------------------------------

@dataclass
class LSTMCache:
    """Per-step activations kept for backprop."""
    text: str
    idxs: np.ndarray
    xs: np.ndarray     # (T, char_dim)
    gates: np.ndarray  # (T, 4H) post-activation [i, f, g, o]
    cs: np.ndarray     # (T, H)
    hs: np.ndarray     # (T, H)


class CharEncoder:
    """Forward character LSTM over the span surface; output = final hidden state.

    Parameters: char embedding table E (trainable, row 0 is UNK), input+recurrent
    weights W of shape (4H, char_dim + H) and bias b, gate order [i, f, g, o].
    """

    def __init__(self, alphabet: str, char_dim: int = 300, hidden: int = 50,
                 seed: int = 0, pretrained: dict[str, np.ndarray] | None = None):
        self.char_to_idx = {c: i + 1 for i, c in enumerate(dict.fromkeys(alphabet))}
        self.char_dim = char_dim
        self.hidden = hidden
        rng = np.random.default_rng(seed)
        n_chars = len(self.char_to_idx) + 1
        scale = 1.0 / np.sqrt(char_dim + hidden)
        e = rng.standard_normal((n_chars, char_dim)) * 0.1
        if pretrained:
            for ch, vec in pretrained.items():
                if ch in self.char_to_idx and len(vec) == char_dim:
                    e[self.char_to_idx[ch]] = vec
        self.params = {
            "char.E": e,
            "char.W": rng.standard_normal((4 * hidden, char_dim + hidden)) * scale,
            "char.b": np.zeros(4 * hidden),
        }
        # forget-gate bias init at 1 helps gradient flow on longer spans
        self.params["char.b"][hidden:2 * hidden] = 1.0

    def _indices(self, text: str) -> np.ndarray:
        return np.array([self.char_to_idx.get(c, 0) for c in text], dtype=np.int64)

    def forward(self, text: str) -> tuple[np.ndarray, LSTMCache]:
        if not text:
            raise ValueError("char_encode: empty span surface")
        e, w, b = self.params["char.E"], self.params["char.W"], self.params["char.b"]
        h_dim = self.hidden
        idxs = self._indices(text)
        t_steps = len(idxs)
        xs = e[idxs]
        gates = np.empty((t_steps, 4 * h_dim))
        cs = np.empty((t_steps, h_dim))
        hs = np.empty((t_steps, h_dim))
        h = np.zeros(h_dim)
        c = np.zeros(h_dim)
        for t in range(t_steps):
            z = w @ np.concatenate([xs[t], h]) + b
            i = _sigmoid(z[:h_dim])
            f = _sigmoid(z[h_dim:2 * h_dim])
            g = np.tanh(z[2 * h_dim:3 * h_dim])
            o = _sigmoid(z[3 * h_dim:])
            c = f * c + i * g
            h = o * np.tanh(c)
            gates[t] = np.concatenate([i, f, g, o])
            cs[t] = c
            hs[t] = h
        return h.copy(), LSTMCache(text, idxs, xs, gates, cs, hs)

    def encode(self, text: str) -> np.ndarray:
        return self.forward(text)[0]

    def backward(self, cache: LSTMCache, dh_last: np.ndarray,
                 grads: dict[str, np.ndarray]) -> None:
        """Accumulate parameter gradients for d(loss)/d(final hidden) = dh_last."""
        e, w = self.params["char.E"], self.params["char.W"]
        h_dim = self.hidden
        t_steps = len(cache.idxs)
        dh = dh_last.astype(np.float64).copy()
        dc = np.zeros(h_dim)
        d_e = grads.setdefault("char.E", np.zeros_like(e))
        d_w = grads.setdefault("char.W", np.zeros_like(w))
        d_b = grads.setdefault("char.b", np.zeros_like(self.params["char.b"]))
        for t in range(t_steps - 1, -1, -1):
            i = cache.gates[t, :h_dim]
            f = cache.gates[t, h_dim:2 * h_dim]
            g = cache.gates[t, 2 * h_dim:3 * h_dim]
            o = cache.gates[t, 3 * h_dim:]
            c = cache.cs[t]
            c_prev = cache.cs[t - 1] if t > 0 else np.zeros(h_dim)
            h_prev = cache.hs[t - 1] if t > 0 else np.zeros(h_dim)
            tanh_c = np.tanh(c)
            do = dh * tanh_c
            dc = dc + dh * o * (1 - tanh_c ** 2)
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            dz = np.concatenate([
                di * i * (1 - i),
                df * f * (1 - f),
                dg * (1 - g ** 2),
                do * o * (1 - o),
            ])
            xh = np.concatenate([cache.xs[t], h_prev])
            d_w += np.outer(dz, xh)
            d_b += dz
            dxh = w.T @ dz
            d_e[cache.idxs[t]] += dxh[:self.char_dim]
            dh = dxh[self.char_dim:]
            dc = dc * f
        return None


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return expit(x)


# -- mention-level assembly -------------------------------------------------

def span_surface(corpus: Corpus, m: Mention) -> str:
    """Span tokens joined by single spaces; the char encoder's input."""
    return " ".join(t.surface for t in corpus.mention_tokens(m))


def span_word_vector(corpus: Corpus, m: Mention, store: StaticVectorStore) -> np.ndarray:
    """Head-word embedding for events; mean over span words for entities."""
    if m.kind == "event":
        return store.lookup(corpus.head_token(m).surface)
    vecs = [store.lookup(t.surface) for t in corpus.mention_tokens(m)]
    return np.mean(vecs, axis=0)


def span_vector(corpus: Corpus, m: Mention, store: StaticVectorStore,
                encoder: CharEncoder) -> np.ndarray:
    """s(m) = [word-level ; char-level]."""
    return np.concatenate([span_word_vector(corpus, m, store),
                           encoder.encode(span_surface(corpus, m))])


def context_vector(corpus: Corpus, m: Mention, store: ContextVectorStore) -> np.ndarray:
    """Contextual vector of the mention's head token; missing key is a hard error."""
    return store.get(m.doc_id, m.sent_idx, m.head_idx)
