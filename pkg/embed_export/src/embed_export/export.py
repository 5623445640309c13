"""The three export operations and their manifest."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .corpus import Document
from .formats import read_static, write_ctx_binary, write_static
from .model import get_model


@dataclass
class ExportManifest:
    corpus: str
    static_out: str | None = None
    ctx_out: str | None = None
    chars_out: str | None = None
    model_id: str = "hash3-1024"
    layer_rule: str = "mean-of-3"
    static_dim: int | None = None     # filled from the source file
    ctx_dim: int | None = None        # filled from the model
    char_dim: int = 300
    records: dict = field(default_factory=dict)


class TokenizationMismatch(ValueError):
    pass


def export_static(vocab: set[str], source_path, out_path) -> int:
    """Copy the in-vocabulary subset of a source vector file.

    One line per known word; OOV words are omitted (the engine zero-fills
    them on lookup). Returns the number of words written.
    """
    source = read_static(source_path)
    folded = {}
    for word, vec in source.items():
        folded.setdefault(word.casefold(), (word, vec))
    out = {}
    for word in vocab:
        hit = folded.get(word.casefold())
        if hit is not None:
            out[hit[0]] = hit[1]
    dims = {len(v) for v in out.values()}
    if len(dims) > 1:
        raise ValueError(f"{source_path}: inconsistent vector dims {sorted(dims)}")
    write_static(out, out_path)
    return len(out)


def export_contextual(docs: list[Document], model_id: str, out_path,
                      expected_dim: int | None = None
                      ) -> dict[tuple[str, int, int], np.ndarray]:
    """One record per token of every mention-bearing sentence; each vector
    is the model's 3-layer mean at that token. Returns the written records.
    """
    model = get_model(model_id)
    if expected_dim is not None and model.dim != expected_dim:
        raise ValueError(f"model {model_id} has dim {model.dim}, "
                         f"expected {expected_dim}")
    records: dict[tuple[str, int, int], np.ndarray] = {}
    for doc in docs:
        for si in sorted(doc.mention_sents):
            tokens = doc.sentences[si]
            vecs = model.encode_sentence(doc.doc_id, si, tokens)
            if vecs.shape != (len(tokens), model.dim):
                raise TokenizationMismatch(
                    f"doc {doc.doc_id} sentence {si}: corpus has "
                    f"{len(tokens)} tokens, model returned {vecs.shape[0]} "
                    f"vectors: {' '.join(tokens)}")
            for ti in range(len(tokens)):
                records[(doc.doc_id, si, ti)] = vecs[ti]
    write_ctx_binary(records, model.dim, out_path)
    return records


def export_chars(alphabet: str, dim: int, out_path, seed: int = 0
                 ) -> dict[str, np.ndarray]:
    """Deterministic per-character vectors in the static text format."""
    table = {}
    for ch in alphabet:
        digest = hashlib.blake2b(f"{seed}|char|{ch}".encode(),
                                 digest_size=8).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "little"))
        v = rng.standard_normal(dim)
        table[ch] = v / np.linalg.norm(v)
    write_static(table, out_path)
    return table
