"""Data model and ingestion for annotated document collections.

The corpus file format is JSON lines, one document object per line:

    {"doc_id": ..., "gold_topic_id": ..., "gold_subtopic_id": ...,
     "sentences": [[{"surface": ..., "lemma": ...,
                     "possessor_of": tok_idx?, "subj_of": tok_idx?, "obj_of": tok_idx?}]],
     "mentions": [{"mention_id": ..., "kind": "entity"|"event", "sent_idx": ...,
                   "start": ..., "end": ..., "head_idx": ..., "gold_cluster_id": ...}],
     "argument_links": [{"event": ..., "entity": ..., "role": "Arg0|Arg1|Loc|Time"}],
     "wd_entity_clusters": [[mention_id, ...], ...]}

Everything is immutable after load; Configuration objects are the only
mutable state and are owned by the clustering engine.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

ROLES = ("Arg0", "Arg1", "Loc", "Time")
KINDS = ("entity", "event")


class CorpusError(Exception):
    """Malformed corpus file or violated corpus invariant."""


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: str
    # optional dependency annotations (token index within the same sentence)
    possessor_of: int | None = None
    subj_of: int | None = None
    obj_of: int | None = None


@dataclass(frozen=True)
class Mention:
    mention_id: str
    kind: str  # "entity" or "event"
    doc_id: str
    sent_idx: int
    start: int
    end: int  # inclusive
    head_idx: int
    gold_cluster_id: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CorpusError(f"mention {self.mention_id}: bad kind {self.kind!r}")
        if not (self.start <= self.head_idx <= self.end):
            raise CorpusError(
                f"mention {self.mention_id}: head_idx {self.head_idx} outside "
                f"span [{self.start}, {self.end}]"
            )


@dataclass(frozen=True)
class ArgumentLink:
    event: str
    entity: str
    role: str
    source: str = "srl"  # "srl" or "heuristic"

    def __post_init__(self):
        if self.role not in ROLES:
            raise CorpusError(f"bad role {self.role!r} (expected one of {ROLES})")


@dataclass
class Document:
    doc_id: str
    sentences: list[list[Token]]
    gold_topic_id: str | None = None
    gold_subtopic_id: str | None = None
    wd_entity_clusters: list[list[str]] | None = None


@dataclass
class Configuration:
    """The evolving partition of one topic's mentions into clusters."""

    topic_id: str
    entity_clusters: list[frozenset[str]] = field(default_factory=list)
    event_clusters: list[frozenset[str]] = field(default_factory=list)

    def clusters(self, kind: str) -> list[frozenset[str]]:
        return self.entity_clusters if kind == "entity" else self.event_clusters

    def set_clusters(self, kind: str, clusters: list[frozenset[str]]) -> None:
        if kind == "entity":
            self.entity_clusters = list(clusters)
        else:
            self.event_clusters = list(clusters)

    def cluster_of(self, mention_id: str, kind: str) -> frozenset[str]:
        for c in self.clusters(kind):
            if mention_id in c:
                return c
        raise KeyError(mention_id)

    def check(self, entity_ids: set[str], event_ids: set[str]) -> None:
        """Assert the disjoint-cover invariant for both sides."""
        for kind, ids in (("entity", entity_ids), ("event", event_ids)):
            seen: set[str] = set()
            for c in self.clusters(kind):
                if not c:
                    raise CorpusError(f"{self.topic_id}: empty {kind} cluster")
                if seen & c:
                    raise CorpusError(
                        f"{self.topic_id}: mention in two {kind} clusters: {sorted(seen & c)}"
                    )
                seen |= c
            if seen != ids:
                raise CorpusError(
                    f"{self.topic_id}: {kind} clusters do not cover the topic "
                    f"(missing {sorted(ids - seen)[:5]}, extra {sorted(seen - ids)[:5]})"
                )


class Corpus:
    def __init__(self, documents: list[Document], mentions: list[Mention],
                 argument_links: list[ArgumentLink]):
        self.documents: dict[str, Document] = {}
        for d in documents:
            if d.doc_id in self.documents:
                raise CorpusError(f"duplicate doc_id {d.doc_id}")
            self.documents[d.doc_id] = d
        self.mentions: dict[str, Mention] = {}
        for m in mentions:
            if m.mention_id in self.mentions:
                raise CorpusError(f"duplicate mention_id {m.mention_id}")
            self.mentions[m.mention_id] = m
        self._validate_mentions()
        self.argument_links = _normalize_links(self, argument_links)
        self._validate_wd_clusters()

    # -- accessors ---------------------------------------------------------

    def tokens(self, doc_id: str, sent_idx: int) -> list[Token]:
        return self.documents[doc_id].sentences[sent_idx]

    def mention_tokens(self, m: Mention) -> list[Token]:
        sent = self.tokens(m.doc_id, m.sent_idx)
        return sent[m.start:m.end + 1]

    def head_token(self, m: Mention) -> Token:
        return self.tokens(m.doc_id, m.sent_idx)[m.head_idx]

    def surface(self, m: Mention) -> str:
        return " ".join(t.surface for t in self.mention_tokens(m))

    def mentions_of_kind(self, kind: str) -> list[Mention]:
        return [m for m in self.mentions.values() if m.kind == kind]

    def doc_mentions(self, doc_id: str, kind: str | None = None) -> list[Mention]:
        out = [m for m in self.mentions.values() if m.doc_id == doc_id]
        if kind is not None:
            out = [m for m in out if m.kind == kind]
        return out

    def abs_head_position(self, m: Mention) -> int:
        """Linear position of the mention head in its document's token stream."""
        doc = self.documents[m.doc_id]
        return sum(len(s) for s in doc.sentences[:m.sent_idx]) + m.head_idx

    def links_for_event(self, event_id: str) -> dict[str, str]:
        """role -> entity mention id (at most one filler per role)."""
        return {l.role: l.entity for l in self.argument_links if l.event == event_id}

    def links_for_entity(self, entity_id: str) -> list[ArgumentLink]:
        return [l for l in self.argument_links if l.entity == entity_id]

    def topics(self) -> dict[str, list[str]]:
        """gold_topic_id -> doc ids (docs without a topic grouped under None)."""
        out: dict[str, list[str]] = {}
        for d in self.documents.values():
            out.setdefault(d.gold_topic_id, []).append(d.doc_id)
        return out

    # -- validation --------------------------------------------------------

    def _validate_mentions(self) -> None:
        for m in self.mentions.values():
            if m.doc_id not in self.documents:
                raise CorpusError(f"mention {m.mention_id}: unknown doc {m.doc_id}")
            doc = self.documents[m.doc_id]
            if not (0 <= m.sent_idx < len(doc.sentences)):
                raise CorpusError(f"mention {m.mention_id}: bad sent_idx {m.sent_idx}")
            if not (0 <= m.start and m.end < len(doc.sentences[m.sent_idx])):
                raise CorpusError(f"mention {m.mention_id}: span outside sentence")

    def _validate_wd_clusters(self) -> None:
        for doc in self.documents.values():
            if doc.wd_entity_clusters is None:
                continue
            doc_entities = {m.mention_id for m in self.doc_mentions(doc.doc_id, "entity")}
            seen: set[str] = set()
            for cluster in doc.wd_entity_clusters:
                for mid in cluster:
                    if mid not in doc_entities:
                        raise CorpusError(
                            f"doc {doc.doc_id}: wd cluster member {mid} is not an "
                            f"entity mention of this document")
                    if mid in seen:
                        raise CorpusError(f"doc {doc.doc_id}: {mid} in two wd clusters")
                    seen.add(mid)
            if seen != doc_entities:
                raise CorpusError(
                    f"doc {doc.doc_id}: wd clusters do not cover entity mentions")

    def with_links(self, links: list[ArgumentLink]) -> "Corpus":
        """A copy of this corpus with a different set of argument links."""
        return Corpus(list(self.documents.values()), list(self.mentions.values()), links)


def _normalize_links(corpus: Corpus, links: list[ArgumentLink]) -> list[ArgumentLink]:
    """Keep at most one filler per (event, role).

    When several entities compete for the same slot, the one whose head is
    nearest to the event head (linear token distance within the document,
    cross-sentence distances measured on the concatenated token stream) wins;
    ties go to the earlier mention, then to the smaller mention_id.
    """
    for l in links:
        ev = corpus.mentions.get(l.event)
        en = corpus.mentions.get(l.entity)
        if ev is None or ev.kind != "event":
            raise CorpusError(f"argument link: {l.event} is not an event mention")
        if en is None or en.kind != "entity":
            raise CorpusError(f"argument link: {l.entity} is not an entity mention")
        if ev.doc_id != en.doc_id:
            raise CorpusError(
                f"argument link {l.event}->{l.entity}: mentions in different documents")
    by_slot: dict[tuple[str, str], list[ArgumentLink]] = {}
    for l in links:
        by_slot.setdefault((l.event, l.role), []).append(l)
    out = []
    for (event_id, role), cands in sorted(by_slot.items()):
        if len(cands) > 1:
            ev = corpus.mentions[event_id]
            ev_pos = corpus.abs_head_position(ev)

            def distance(link: ArgumentLink) -> tuple[int, int, str]:
                en = corpus.mentions[link.entity]
                pos = corpus.abs_head_position(en)
                return (abs(pos - ev_pos), pos, link.entity)

            cands = sorted(cands, key=distance)
            dropped = [c.entity for c in cands[1:]]
            warnings.warn(
                f"event {event_id}: multiple {role} fillers, keeping "
                f"{cands[0].entity}, dropping {dropped}")
        out.append(cands[0])
    return out


# -- loading / serialization ----------------------------------------------

def _parse_document(obj: dict) -> tuple[Document, list[Mention], list[ArgumentLink]]:
    doc_id = obj["doc_id"]
    sentences = [
        [Token(t["surface"], t["lemma"],
               t.get("possessor_of"), t.get("subj_of"), t.get("obj_of"))
         for t in sent]
        for sent in obj["sentences"]
    ]
    doc = Document(
        doc_id=doc_id,
        sentences=sentences,
        gold_topic_id=obj.get("gold_topic_id"),
        gold_subtopic_id=obj.get("gold_subtopic_id"),
        wd_entity_clusters=obj.get("wd_entity_clusters"),
    )
    mentions = [
        Mention(m["mention_id"], m["kind"], doc_id, m["sent_idx"],
                m["start"], m["end"], m["head_idx"], m.get("gold_cluster_id"))
        for m in obj.get("mentions", [])
    ]
    links = [
        ArgumentLink(l["event"], l["entity"], l["role"], l.get("source", "srl"))
        for l in obj.get("argument_links", [])
    ]
    return doc, mentions, links


def load_corpus(path) -> Corpus:
    documents, mentions, links = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                doc, ms, ls = _parse_document(obj)
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from exc
            documents.append(doc)
            mentions.extend(ms)
            links.extend(ls)
    return Corpus(documents, mentions, links)


def serialize(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus.documents.values():
            fh.write(json.dumps(document_to_obj(corpus, doc), ensure_ascii=False))
            fh.write("\n")


def document_to_obj(corpus: Corpus, doc: Document) -> dict:
    def tok(t: Token) -> dict:
        d = {"surface": t.surface, "lemma": t.lemma}
        for k in ("possessor_of", "subj_of", "obj_of"):
            v = getattr(t, k)
            if v is not None:
                d[k] = v
        return d

    obj: dict = {"doc_id": doc.doc_id, "sentences": [[tok(t) for t in s] for s in doc.sentences]}
    if doc.gold_topic_id is not None:
        obj["gold_topic_id"] = doc.gold_topic_id
    if doc.gold_subtopic_id is not None:
        obj["gold_subtopic_id"] = doc.gold_subtopic_id
    mentions = []
    for m in sorted(corpus.doc_mentions(doc.doc_id), key=lambda m: m.mention_id):
        md = {"mention_id": m.mention_id, "kind": m.kind, "sent_idx": m.sent_idx,
              "start": m.start, "end": m.end, "head_idx": m.head_idx}
        if m.gold_cluster_id is not None:
            md["gold_cluster_id"] = m.gold_cluster_id
        mentions.append(md)
    obj["mentions"] = mentions
    doc_events = {m.mention_id for m in corpus.doc_mentions(doc.doc_id, "event")}
    obj["argument_links"] = [
        {"event": l.event, "entity": l.entity, "role": l.role, "source": l.source}
        for l in corpus.argument_links if l.event in doc_events
    ]
    if doc.wd_entity_clusters is not None:
        obj["wd_entity_clusters"] = doc.wd_entity_clusters
    return obj


# -- initial configurations ------------------------------------------------

def singleton_events(topic_id: str, event_mention_ids) -> list[frozenset[str]]:
    """One cluster per event mention."""
    return [frozenset([mid]) for mid in sorted(event_mention_ids)]


def init_entities(corpus: Corpus, doc_ids, mode: str) -> list[frozenset[str]]:
    """Initial entity clusters: within-document only, never cross-document.

    mode "wd_system" uses the documents' wd_entity_clusters annotations;
    mode "gold_wd" uses gold chains restricted to each single document.
    """
    clusters: list[frozenset[str]] = []
    for doc_id in sorted(doc_ids):
        doc = corpus.documents[doc_id]
        ents = corpus.doc_mentions(doc_id, "entity")
        if mode == "wd_system":
            if doc.wd_entity_clusters is None:
                raise CorpusError(f"doc {doc_id}: missing wd_entity_clusters")
            clusters.extend(frozenset(c) for c in doc.wd_entity_clusters)
        elif mode == "gold_wd":
            chains: dict[str, set[str]] = {}
            for m in ents:
                if m.gold_cluster_id is None:
                    raise CorpusError(f"mention {m.mention_id}: missing gold_cluster_id")
                chains.setdefault(m.gold_cluster_id, set()).add(m.mention_id)
            clusters.extend(frozenset(c) for _, c in sorted(chains.items()))
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return clusters


def gold_partition(mentions) -> dict[str, set[str]]:
    """gold_cluster_id -> mention ids, for mentions that carry a gold id."""
    out: dict[str, set[str]] = {}
    for m in mentions:
        if m.gold_cluster_id is None:
            raise CorpusError(f"mention {m.mention_id}: missing gold_cluster_id")
        out.setdefault(m.gold_cluster_id, set()).add(m.mention_id)
    return out
