"""Cross-document entity and event coreference resolution."""

__version__ = "0.1.0"
