"""Synthetic corpus generator for tests and desk-scale end-to-end runs.

Each topic holds a fixed number of event chains and entity chains. Every
event-chain mention produces one sentence of the form

    [subject entity] [event word] [object entity] filler filler

with explicit Arg0/Arg1 links. Entity chains have distinct surface words, so
entity coreference is resolvable from spans alone. Event chains come in
"ambiguous" pairs that share the same surface word but take their arguments
from different entity chains: only the argument structure disambiguates
them. Topic-specific filler vocabulary makes document clustering exactly
recoverable from TF-IDF n-grams.

Sentences repeat a mention's surface exactly with probability
`p_same_surface`; otherwise a spelling variant (suffixed) is used.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import ArgumentLink, Corpus, Document, Mention, Token


@dataclass
class GeneratorParams:
    n_topics: int = 3
    docs_per_topic: int = 4
    event_chains: int = 4        # per topic; consecutive pairs are ambiguous
    mentions_per_chain: int = 5  # event mentions (= sentences) per chain
    ambiguous_pairs: int = 1     # leading chain pairs sharing a surface word
    p_same_surface: float = 1.0
    filler_words: int = 6
    seed: int = 0
    topic_offset: int = 0        # shifts topic ids (for disjoint train/test sets)


def _fresh_word(rng: random.Random, used: set[str]) -> str:
    while True:
        w = "".join(rng.choice("bcdfghjklmnpqrstvwz") + rng.choice("aeiou")
                    for _ in range(4))
        if w not in used:
            used.add(w)
            return w


def generate_corpus(params: GeneratorParams) -> Corpus:
    rng = random.Random(params.seed)
    used_words: set[str] = set()
    documents: list[Document] = []
    mentions: list[Mention] = []
    links: list[ArgumentLink] = []

    for t_local in range(params.n_topics):
        t = t_local + params.topic_offset
        topic_id = f"topic{t}"
        fillers = [_fresh_word(rng, used_words) for _ in range(params.filler_words)]
        k = params.event_chains
        # one subject and one object entity chain per event chain
        subj_words = [_fresh_word(rng, used_words) for _ in range(k)]
        obj_words = [_fresh_word(rng, used_words) for _ in range(k)]
        event_words = []
        pair_words: dict[int, str] = {}
        for c in range(k):
            pair = c // 2
            if pair < params.ambiguous_pairs:
                if pair not in pair_words:
                    pair_words[pair] = _fresh_word(rng, used_words)
                event_words.append(pair_words[pair])
            else:
                event_words.append(_fresh_word(rng, used_words))

        docs = [Document(doc_id=f"d{t}_{d}", sentences=[], gold_topic_id=topic_id)
                for d in range(params.docs_per_topic)]
        doc_entity_chains: list[dict[str, set[str]]] = [
            {} for _ in range(params.docs_per_topic)]
        counter = 0

        for c in range(k):
            for m_idx in range(params.mentions_per_chain):
                d = (c + m_idx) % params.docs_per_topic
                doc = docs[d]
                sent_idx = len(doc.sentences)

                def surface(word: str) -> str:
                    if rng.random() < params.p_same_surface:
                        return word
                    return word + "ish"

                subj_s = surface(subj_words[c])
                evt_s = surface(event_words[c])
                obj_s = surface(obj_words[c])
                toks = [Token(subj_s, subj_words[c]),
                        Token(evt_s, event_words[c]),
                        Token(obj_s, obj_words[c])]
                toks.extend(Token(w, w) for w in rng.sample(fillers, 2))
                doc.sentences.append(toks)

                evt_id = f"m{t}_{counter}_v"
                subj_id = f"m{t}_{counter}_s"
                obj_id = f"m{t}_{counter}_o"
                counter += 1
                mentions.append(Mention(subj_id, "entity", doc.doc_id, sent_idx,
                                        0, 0, 0, f"t{t}:ent_s{c}"))
                mentions.append(Mention(evt_id, "event", doc.doc_id, sent_idx,
                                        1, 1, 1, f"t{t}:evt{c}"))
                mentions.append(Mention(obj_id, "entity", doc.doc_id, sent_idx,
                                        2, 2, 2, f"t{t}:ent_o{c}"))
                links.append(ArgumentLink(evt_id, subj_id, "Arg0"))
                links.append(ArgumentLink(evt_id, obj_id, "Arg1"))
                doc_entity_chains[d].setdefault(f"t{t}:ent_s{c}", set()).add(subj_id)
                doc_entity_chains[d].setdefault(f"t{t}:ent_o{c}", set()).add(obj_id)

        for d, doc in enumerate(docs):
            doc.wd_entity_clusters = [sorted(v)
                                      for _, v in sorted(doc_entity_chains[d].items())]
            documents.append(doc)

    return Corpus(documents, mentions, links)


def gold_doc_topics(corpus: Corpus) -> dict[str, str]:
    return {d.doc_id: d.gold_topic_id for d in corpus.documents.values()}


def gold_partitions(corpus: Corpus, kind: str) -> list[set[str]]:
    chains: dict[str, set[str]] = {}
    for m in corpus.mentions_of_kind(kind):
        chains.setdefault(m.gold_cluster_id, set()).add(m.mention_id)
    return [chains[k] for k in sorted(chains)]
