"""Run configuration: every constant defaults to the published setup and is
overridable via a YAML config file and/or CLI flags (flags > file > defaults)."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import yaml


@dataclass
class RunConfig:
    # dimensions
    word_dim: int = 300
    char_dim: int = 300
    char_hidden: int = 50
    ctx_dim: int = 1024
    femb_dim: int = 50
    hidden: int = 4261
    # clustering
    delta_train: float = 0.5   # merge threshold during training
    delta_infer: float = 0.5   # merge threshold during inference
    max_iterations: int = 10
    k: int | str = 20          # topic count, or "auto" for silhouette selection
    # optimization
    seed: int = 0
    lr: float = 1e-3
    batch_size: int = 16
    epochs: int = 1            # scorer epochs per train-merge step
    passes: int = 1            # full passes over the training topics
    reinit_scorers: bool = False
    joint: bool = True         # False ablates d(m) and the pair features
    # vector sources
    static_vectors: str | None = None   # text file; None -> hashed fallback
    ctx_vectors: str | None = None      # binary/jsonl file; None -> hashed fallback
    char_vectors: str | None = None     # pretrained char embeddings, text file
    ctx_fallback_seed: int = 0
    # parallelism
    workers: int = 1

    def __post_init__(self):
        if not (0.0 < self.delta_train < 1.0 and 0.0 < self.delta_infer < 1.0):
            raise ValueError("merge thresholds must lie in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    @property
    def span_dim(self) -> int:
        return self.word_dim + self.char_hidden

    def v_dim(self) -> int:
        base = self.ctx_dim + self.span_dim
        return base + 4 * self.span_dim if self.joint else base

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def load(cls, path=None, overrides: dict | None = None) -> "RunConfig":
        values: dict = {}
        if path is not None:
            with open(path, encoding="utf-8") as fh:
                data = yaml.safe_load(fh) or {}
            if not isinstance(data, dict):
                raise ValueError(f"{path}: config must be a key-value document")
            known = {f.name for f in fields(cls)}
            unknown = set(data) - known
            if unknown:
                raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
            values.update(data)
        if overrides:
            values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)
