"""Minimal reader for the corpus JSON-lines format.

Only what the exporter needs: token surfaces per sentence, which sentences
contain mentions, and mention head-token positions. Deeper validation is
the engine's job.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class Document:
    doc_id: str
    sentences: list[list[str]]            # token surfaces
    mention_sents: set[int] = field(default_factory=set)
    mention_heads: set[tuple[int, int]] = field(default_factory=set)


class CorpusError(ValueError):
    pass


def load_corpus(path) -> list[Document]:
    docs: list[Document] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: bad JSON: {exc}") from exc
            try:
                doc = Document(
                    doc_id=obj["doc_id"],
                    sentences=[[t["surface"] for t in sent]
                               for sent in obj["sentences"]],
                )
                for m in obj.get("mentions", []):
                    doc.mention_sents.add(m["sent_idx"])
                    doc.mention_heads.add((m["sent_idx"], m["head_idx"]))
            except (KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{lineno}: missing field {exc}") from exc
            if doc.doc_id in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate doc_id {doc.doc_id!r}")
            seen.add(doc.doc_id)
            docs.append(doc)
    return docs


def vocabulary(docs: list[Document]) -> set[str]:
    return {tok for d in docs for sent in d.sentences for tok in sent}


def alphabet(docs: list[Document]) -> str:
    chars = {c for d in docs for sent in d.sentences for tok in sent for c in tok}
    return "".join(sorted(chars | {" "}))
