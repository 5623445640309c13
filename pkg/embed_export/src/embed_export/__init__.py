"""Embedding export tool: writes the coreference engine's vector file
formats (static word vectors, character vectors, per-token contextual
vectors) for a given corpus."""

__version__ = "0.1.0"
