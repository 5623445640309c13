"""Argument structure: role slots, augmentation heuristics, the dependency
vector d(m) and the binary pair features f(i,j).

Role slots are derived from the corpus argument links. For an event the
filler of a role is an entity mention; for an entity the slot holds the
event in which the entity plays that role (nearest event head wins when
several events compete).
"""

from __future__ import annotations

import numpy as np

from .corpus import ROLES, ArgumentLink, Corpus, Mention


# -- augmentation heuristics ------------------------------------------------

def augment_links(corpus: Corpus) -> Corpus:
    """Fill unfilled (event, role) slots with heuristic links.

    In order: (1) possessor of a nominal event head -> Arg0; (2) dependency
    subject/object arcs -> Arg0/Arg1; (3) nearest entity mention left/right of
    the event head in the same sentence -> Arg0/Arg1. Existing SRL links are
    never overwritten.
    """
    filled = {(l.event, l.role) for l in corpus.argument_links}
    new_links: list[ArgumentLink] = []

    def claim(event_id: str, role: str, entity_id: str) -> None:
        if (event_id, role) not in filled:
            filled.add((event_id, role))
            new_links.append(ArgumentLink(event_id, entity_id, role, source="heuristic"))

    events = sorted(corpus.mentions_of_kind("event"), key=lambda m: m.mention_id)
    entities = corpus.mentions_of_kind("entity")

    def sentence_entities(doc_id: str, sent_idx: int) -> list[Mention]:
        return [e for e in entities if e.doc_id == doc_id and e.sent_idx == sent_idx]

    for ev in events:
        sent = corpus.tokens(ev.doc_id, ev.sent_idx)
        ents_here = sentence_entities(ev.doc_id, ev.sent_idx)
        # (1) possessive nominal: entity token marked possessor of the event head
        for ent in sorted(ents_here, key=lambda e: (e.head_idx, e.mention_id)):
            for ti in range(ent.start, ent.end + 1):
                if sent[ti].possessor_of == ev.head_idx:
                    claim(ev.mention_id, "Arg0", ent.mention_id)
        # (2) dependency subject / object arcs
        for ent in sorted(ents_here, key=lambda e: (e.head_idx, e.mention_id)):
            head = sent[ent.head_idx]
            if head.subj_of == ev.head_idx:
                claim(ev.mention_id, "Arg0", ent.mention_id)
            if head.obj_of == ev.head_idx:
                claim(ev.mention_id, "Arg1", ent.mention_id)
        # (3) nearest left -> Arg0, nearest right -> Arg1
        left = [e for e in ents_here if e.head_idx < ev.head_idx]
        right = [e for e in ents_here if e.head_idx > ev.head_idx]
        if left:
            best = max(left, key=lambda e: (e.head_idx, e.mention_id))
            claim(ev.mention_id, "Arg0", best.mention_id)
        if right:
            best = min(right, key=lambda e: (e.head_idx, e.mention_id))
            claim(ev.mention_id, "Arg1", best.mention_id)

    if not new_links:
        return corpus
    return corpus.with_links(corpus.argument_links + new_links)


# -- role slots -------------------------------------------------------------

def role_slots(corpus: Corpus, m: Mention) -> dict[str, str | None]:
    """role -> filler mention id (entity filler for events, event for entities)."""
    slots: dict[str, str | None] = {r: None for r in ROLES}
    if m.kind == "event":
        for role, entity_id in corpus.links_for_event(m.mention_id).items():
            slots[role] = entity_id
        return slots
    # entity: the event it serves in each role; nearest event head wins
    pos = corpus.abs_head_position(m)
    for role in ROLES:
        cands = [l.event for l in corpus.links_for_entity(m.mention_id) if l.role == role]
        if cands:
            slots[role] = min(
                cands,
                key=lambda ev: (abs(corpus.abs_head_position(corpus.mentions[ev]) - pos),
                                corpus.abs_head_position(corpus.mentions[ev]), ev))
    return slots


# -- d(m) and f(i,j) --------------------------------------------------------

def dep_vector(corpus: Corpus, m: Mention, other_clusters: list[frozenset[str]],
               span_vectors: dict[str, np.ndarray]) -> np.ndarray:
    """Concatenated per-role averaged span vectors of the fillers' clusters.

    other_clusters is the current partition of the opposite-kind mentions.
    An unfilled role contributes a zero block.
    """
    span_dim = len(next(iter(span_vectors.values())))
    slots = role_slots(corpus, m)
    blocks = []
    for role in ROLES:
        filler = slots[role]
        if filler is None:
            blocks.append(np.zeros(span_dim))
            continue
        cluster = _find_cluster(other_clusters, filler)
        blocks.append(np.mean([span_vectors[x] for x in sorted(cluster)], axis=0))
    return np.concatenate(blocks)


def pair_features(corpus: Corpus, m_i: Mention, m_j: Mention,
                  other_clusters: list[frozenset[str]]) -> tuple[bool, bool, bool, bool]:
    """Per role: do the two mentions have coreferring fillers (same cluster of
    the opposite side)? Unfilled slots give False."""
    if m_i.kind != m_j.kind:
        raise ValueError(f"pair_features: kind mismatch {m_i.kind} vs {m_j.kind}")
    slots_i = role_slots(corpus, m_i)
    slots_j = role_slots(corpus, m_j)
    out = []
    for role in ROLES:
        a, b = slots_i[role], slots_j[role]
        if a is None or b is None:
            out.append(False)
        elif a == b:
            out.append(True)
        else:
            out.append(_find_cluster(other_clusters, a) is _find_cluster(other_clusters, b))
    return tuple(out)


def _find_cluster(clusters: list[frozenset[str]], mention_id: str) -> frozenset[str]:
    for c in clusters:
        if mention_id in c:
            return c
    raise KeyError(f"mention {mention_id} not covered by the given clusters")
