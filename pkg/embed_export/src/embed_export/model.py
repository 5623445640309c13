"""Contextual models for per-token vector extraction.

A model maps one sentence (a token list) to one vector per token, defined
as the mean of its three layer outputs. The registry ships deterministic
seeded-hash stand-ins with the same shape contract as a real 3-layer
contextual encoder (published dim, verified at export time); a real model
is one more registry entry.
"""

from __future__ import annotations

import hashlib

import numpy as np

N_LAYERS = 3


class Hash3Model:
    """Deterministic stand-in: three seeded pseudo-random layers per token."""

    def __init__(self, model_id: str, dim: int, seed: int = 0):
        self.model_id = model_id
        self.dim = dim
        self.seed = seed

    def _layer(self, key: str) -> np.ndarray:
        digest = hashlib.blake2b(f"{self.seed}|{key}".encode(),
                                 digest_size=8).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "little"))
        v = rng.standard_normal(self.dim)
        return v / np.linalg.norm(v)

    def encode_sentence(self, doc_id: str, sent_idx: int,
                        tokens: list[str]) -> np.ndarray:
        """(n_tokens, dim) array: per token, the mean of the 3 layers."""
        out = np.empty((len(tokens), self.dim))
        for ti, tok in enumerate(tokens):
            layers = [self._layer(f"{self.model_id}|L{l}|{doc_id}|{sent_idx}|{ti}|{tok}")
                      for l in range(N_LAYERS)]
            out[ti] = np.mean(layers, axis=0)
        return out


_REGISTRY = {
    "hash3-1024": lambda: Hash3Model("hash3-1024", 1024),
    "hash3-64": lambda: Hash3Model("hash3-64", 64),
}


def get_model(model_id: str):
    try:
        return _REGISTRY[model_id]()
    except KeyError:
        raise ValueError(
            f"unknown contextual model {model_id!r}; "
            f"available: {', '.join(sorted(_REGISTRY))}") from None
