"""Assembly of full mention vectors for one side of one topic.

v(m) = [context ; word-level span ; char-level span ; four role blocks],
where each role block is the averaged span vector of the current cluster of
the mention's filler on the opposite side. Because the char-level parts are
trainable, the assembler also tracks, for every position of v(m) fed by a
char encoding, which mention's encoding it came from and with what
coefficient, so gradients can flow back into the encoder end-to-end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import ROLES, Corpus, Mention
from .deps import pair_features, role_slots, _find_cluster
from .embed import (CharEncoder, ContextVectorStore, StaticVectorStore,
                    span_surface, span_word_vector)


@dataclass
class CharContrib:
    member_id: str   # whose char encoding
    offset: int      # start of the hidden-size block inside v(m)
    coeff: float


class FeatureSpace:
    """Feature assembly for the mentions of one kind within one topic.

    The opposite side's clusters are frozen at construction time; rebuilding
    the space is the "update joint features" step of the clustering loop.
    """

    def __init__(self, corpus: Corpus, side_mentions: list[Mention],
                 other_clusters: list[frozenset[str]],
                 static_store: StaticVectorStore, ctx_store: ContextVectorStore,
                 encoder: CharEncoder, joint: bool = True):
        self.corpus = corpus
        self.encoder = encoder
        self.joint = joint
        self.mentions = {m.mention_id: m for m in side_mentions}
        self.word_dim = static_store.dim
        self.ctx_dim = ctx_store.dim
        self.hidden = encoder.hidden
        self.span_dim = self.word_dim + self.hidden
        self.v_dim = self.ctx_dim + self.span_dim + (4 * self.span_dim if joint else 0)

        self._ctx: dict[str, np.ndarray] = {}
        self._word: dict[str, np.ndarray] = {}
        self._surface: dict[str, str] = {}
        self._slots: dict[str, dict[str, str | None]] = {}
        self._fillers: dict[str, dict[str, tuple[str, ...]]] = {}
        self._other_clusters = other_clusters

        need_span: set[str] = set(self.mentions)
        for mid, m in self.mentions.items():
            self._ctx[mid] = ctx_store.get(m.doc_id, m.sent_idx, m.head_idx)
            if joint:
                slots = role_slots(corpus, m)
                self._slots[mid] = slots
                fillers: dict[str, tuple[str, ...]] = {}
                for role in ROLES:
                    filler = slots[role]
                    if filler is not None:
                        cluster = _find_cluster(other_clusters, filler)
                        fillers[role] = tuple(sorted(cluster))
                        need_span.update(cluster)
                self._fillers[mid] = fillers
        for mid in need_span:
            m = corpus.mentions[mid]
            self._word[mid] = span_word_vector(corpus, m, static_store)
            self._surface[mid] = span_surface(corpus, m)
        self._span_members = sorted(need_span)

    # -- encoding ----------------------------------------------------------

    def encode_all(self, with_cache: bool = False):
        """Char-encode every span the space depends on (side + filler members)."""
        return self.encode(self._span_members, with_cache)

    def encode(self, mention_ids, with_cache: bool = False):
        # mentions sharing an identical surface share one encoder pass
        by_surface: dict[str, object] = {}
        out = {}
        for mid in mention_ids:
            s = self._surface[mid]
            if s not in by_surface:
                by_surface[s] = (self.encoder.forward(s) if with_cache
                                 else self.encoder.encode(s))
            out[mid] = by_surface[s]
        return out

    def surface(self, mid: str) -> str:
        return self._surface[mid]

    def needed_for(self, mention_ids) -> list[str]:
        """Mentions whose char encodings feed the given mentions' vectors."""
        need: set[str] = set()
        for mid in mention_ids:
            need.add(mid)
            if self.joint:
                for members in self._fillers[mid].values():
                    need.update(members)
        return sorted(need)

    # -- assembly ----------------------------------------------------------

    def vector(self, mid: str, h: dict[str, np.ndarray]) -> np.ndarray:
        """Assemble v(mid) given char encodings h (mention id -> hidden vector)."""
        parts = [self._ctx[mid], self._word[mid], h[mid]]
        if self.joint:
            for role in ROLES:
                members = self._fillers[mid].get(role)
                if members is None:
                    parts.append(np.zeros(self.span_dim))
                else:
                    span = np.mean(
                        [np.concatenate([self._word[x], h[x]]) for x in members], axis=0)
                    parts.append(span)
        return np.concatenate(parts)

    def vectors(self, h: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
        return {mid: self.vector(mid, h) for mid in self.mentions}

    def char_contribs(self, mid: str) -> list[CharContrib]:
        """Where, inside v(mid), char encodings appear and with what weight."""
        out = [CharContrib(mid, self.ctx_dim + self.word_dim, 1.0)]
        if self.joint:
            base = self.ctx_dim + self.span_dim
            for r, role in enumerate(ROLES):
                members = self._fillers[mid].get(role)
                if members is None:
                    continue
                off = base + r * self.span_dim + self.word_dim
                coeff = 1.0 / len(members)
                out.extend(CharContrib(x, off, coeff) for x in members)
        return out

    def features(self, mid_i: str, mid_j: str):
        """The four binary pair features, or None in disjoint mode."""
        if not self.joint:
            return None
        return pair_features(self.corpus, self.mentions[mid_i], self.mentions[mid_j],
                             self._other_clusters)
