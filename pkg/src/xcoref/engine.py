"""The alternating entity/event agglomerative clustering loop.

Inference initializes events as singletons and entities from within-document
clusters, then alternates: rebuild one side's joint features from the other
side's current clusters, score all mention pairs, and greedily merge the
highest-scoring cluster pairs while the cluster-pair score stays above the
threshold. Training simulates the same loop on gold topics, fitting the two
pair scorers on cross-cluster pairs labeled by the gold chains.
"""

from __future__ import annotations

import json

import numpy as np

from . import corpus as corpus_mod
from .config import RunConfig
from .corpus import Configuration, Corpus
from .deps import augment_links
from .embed import CharEncoder, ContextVectorStore, StaticVectorStore
from .features import FeatureSpace
from .scorer import (MODEL_MAGIC, Adam, PairScorer, _read_arrays, _write_arrays,
                     batches, bce, make_training_pairs)

PairCache = dict[tuple[str, str], float]


def _key(i: str, j: str) -> tuple[str, str]:
    return (i, j) if i <= j else (j, i)


# -- cluster-pair scores and greedy merging ---------------------------------

def cluster_pair_score(c_i: frozenset[str], c_j: frozenset[str],
                       cache: PairCache) -> float:
    """Average mention-linkage score over all cross pairs of the two clusters."""
    total = 0.0
    for mi in c_i:
        for mj in c_j:
            total += cache[_key(mi, mj)]
    return total / (len(c_i) * len(c_j))


def merge_clusters(clusters: list[frozenset[str]], cache: PairCache,
                   delta: float) -> tuple[list[frozenset[str]], int]:
    """Greedy sequential merging: repeatedly merge the argmax cluster pair
    while its score is >= delta. Ties go to the pair with the
    lexicographically smallest involved mention ids. Returns the new
    partition and the number of merges performed.
    """
    live: dict[str, frozenset[str]] = {min(c): c for c in clusters}
    sums: dict[tuple[str, str], float] = {}
    reps = sorted(live)
    for a in range(len(reps)):
        for b in range(a + 1, len(reps)):
            ra, rb = reps[a], reps[b]
            sums[(ra, rb)] = sum(cache[_key(i, j)] for i in live[ra] for j in live[rb])
    n_merges = 0
    while len(live) > 1:
        best_key, best_score = None, -np.inf
        for (ra, rb), s in sorted(sums.items()):
            score = s / (len(live[ra]) * len(live[rb]))
            if score > best_score:
                best_key, best_score = (ra, rb), score
        if best_score < delta:
            break
        ra, rb = best_key
        merged = live[ra] | live[rb]
        del live[ra], live[rb]
        new_rep = min(ra, rb)
        sums.pop((ra, rb))
        for rc in list(live):
            sa = sums.pop(tuple(sorted((ra, rc))))
            sb = sums.pop(tuple(sorted((rb, rc))))
            sums[tuple(sorted((new_rep, rc)))] = sa + sb
        live[new_rep] = merged
        n_merges += 1
    return [live[r] for r in sorted(live)], n_merges


def score_all_pairs(mention_ids: list[str], score_fn) -> PairCache:
    """Symmetric pairwise scores for every unordered pair of mentions."""
    cache: PairCache = {}
    ids = sorted(mention_ids)
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            cache[(ids[a], ids[b])] = float(score_fn(ids[a], ids[b]))
    return cache


# -- the trained model -------------------------------------------------------

def corpus_alphabet(corpus: Corpus) -> str:
    chars: set[str] = {" "}
    for doc in corpus.documents.values():
        for sent in doc.sentences:
            for tok in sent:
                chars.update(tok.surface)
    return "".join(sorted(chars))


class CorefModel:
    """Both pair scorers plus the shared char encoder and the run config."""

    def __init__(self, cfg: RunConfig, alphabet: str,
                 char_pretrained: dict[str, np.ndarray] | None = None):
        self.cfg = cfg
        self.alphabet = alphabet
        self.encoder = CharEncoder(alphabet, cfg.char_dim, cfg.char_hidden,
                                   seed=cfg.seed, pretrained=char_pretrained)
        self.scorer_e = self._new_scorer(seed=cfg.seed + 1)
        self.scorer_v = self._new_scorer(seed=cfg.seed + 2)

    def _new_scorer(self, seed: int) -> PairScorer:
        return PairScorer(self.cfg.v_dim(), hidden=self.cfg.hidden,
                          femb_dim=self.cfg.femb_dim,
                          use_pair_features=self.cfg.joint, seed=seed)

    def scorer(self, kind: str) -> PairScorer:
        return self.scorer_e if kind == "entity" else self.scorer_v

    def save(self, path) -> None:
        arrays = {}
        for prefix, src in (("E.", self.scorer_e.params),
                            ("V.", self.scorer_v.params),
                            ("", self.encoder.params)):
            for k, v in src.items():
                arrays[prefix + k] = v
        meta = {"version": 1, "config": _jsonable(self.cfg.to_dict()),
                "alphabet": self.alphabet}
        with open(path, "wb") as fh:
            _write_arrays(fh, MODEL_MAGIC, meta, arrays)

    @classmethod
    def load(cls, path) -> "CorefModel":
        with open(path, "rb") as fh:
            meta, arrays = _read_arrays(fh, MODEL_MAGIC)
        cfg = RunConfig(**meta["config"])
        model = cls(cfg, meta["alphabet"])
        for k, v in arrays.items():
            if k.startswith("E."):
                model.scorer_e.params[k[2:]][...] = v
            elif k.startswith("V."):
                model.scorer_v.params[k[2:]][...] = v
            else:
                model.encoder.params[k][...] = v
        return model


def _jsonable(d: dict) -> dict:
    return json.loads(json.dumps(d))


# -- vector stores -----------------------------------------------------------

def open_stores(corpus: Corpus, cfg: RunConfig) -> tuple[StaticVectorStore,
                                                         ContextVectorStore]:
    if cfg.static_vectors:
        static = StaticVectorStore.load(cfg.static_vectors)
        if static.dim != cfg.word_dim:
            raise ValueError(f"static store dim {static.dim} != word_dim {cfg.word_dim}")
    else:
        vocab = {t.surface for d in corpus.documents.values()
                 for s in d.sentences for t in s}
        static = StaticVectorStore.hashed(vocab, cfg.word_dim, seed=cfg.seed)
    if cfg.ctx_vectors:
        path = str(cfg.ctx_vectors)
        if path.endswith(".jsonl"):
            ctx = ContextVectorStore.load_jsonl(path)
        else:
            ctx = ContextVectorStore.load_binary(path)
        if ctx.dim != cfg.ctx_dim:
            raise ValueError(f"context store dim {ctx.dim} != ctx_dim {cfg.ctx_dim}")
        if not ctx.covers(corpus):
            raise ValueError("context store does not cover all mention head tokens")
    else:
        ctx = ContextVectorStore.hashed(corpus, cfg.ctx_dim, seed=cfg.ctx_fallback_seed)
    return static, ctx


def load_char_pretrained(path) -> dict[str, np.ndarray]:
    store = StaticVectorStore.load(path)
    return {k: v for k, v in store.table.items() if len(k) == 1}


# -- end-to-end training step ------------------------------------------------

def batch_loss_and_grads(fs: FeatureSpace, sc: PairScorer,
                         batch: list[tuple[tuple[str, str], int]]
                         ) -> tuple[float, dict[str, np.ndarray]]:
    """Mean BCE over a batch of labeled pairs, with gradients for the scorer,
    the pair-feature embeddings, and the char encoder (end to end)."""
    pair_mentions = sorted({m for (i, j), _ in batch for m in (i, j)})
    needed = fs.needed_for(pair_mentions)
    enc = fs.encode(needed, with_cache=True)
    h = {mid: hc[0] for mid, hc in enc.items()}
    v = {mid: fs.vector(mid, h) for mid in pair_mentions}
    grads: dict[str, np.ndarray] = {}
    dh: dict[str, np.ndarray] = {mid: np.zeros(fs.hidden) for mid in needed}
    total = 0.0
    inv_b = 1.0 / len(batch)
    for (i, j), y in batch:
        f = fs.features(i, j)
        x = sc.input_vector(v[i], v[j], f)
        p, cache = sc.forward(x)
        total += bce(p, y)
        dx = sc.backward(cache, (p - y) * inv_b, grads)
        dv_i, dv_j = sc.split_input_grad(dx, v[i], v[j], f, grads)
        for mid, dv in ((i, dv_i), (j, dv_j)):
            for contrib in fs.char_contribs(mid):
                dh[contrib.member_id] += contrib.coeff * \
                    dv[contrib.offset:contrib.offset + fs.hidden]
    # mentions with the same surface share an encoder pass: sum their dh first
    dh_by_surface: dict[str, np.ndarray] = {}
    cache_by_surface: dict[str, object] = {}
    for mid in needed:
        s = fs.surface(mid)
        cache_by_surface[s] = enc[mid][1]
        dh_by_surface[s] = dh_by_surface.get(s, 0.0) + dh[mid]
    for s, d in dh_by_surface.items():
        if np.any(d):
            fs.encoder.backward(cache_by_surface[s], d, grads)
    return total * inv_b, grads


def train_scorer_on_pairs(fs: FeatureSpace, sc: PairScorer,
                          pairs: list[tuple[tuple[str, str], int]],
                          adam_scorer: Adam, adam_char: Adam,
                          batch_size: int, epochs: int) -> float:
    """Minibatch Adam on the generated pairs; returns the last mean batch loss."""
    last = float("nan")
    for _ in range(epochs):
        for batch in batches(pairs, batch_size):
            loss, grads = batch_loss_and_grads(fs, sc, batch)
            char_grads = {k: g for k, g in grads.items() if k.startswith("char.")}
            sc_grads = {k: g for k, g in grads.items() if not k.startswith("char.")}
            adam_scorer.step(sc.params, sc_grads)
            adam_char.step(fs.encoder.params, char_grads)
            last = loss
    return last


# -- scoring passes ----------------------------------------------------------

def neural_pair_cache(fs: FeatureSpace, sc: PairScorer) -> PairCache:
    """Freeze the current parameters and score every unordered mention pair."""
    h = fs.encode_all()
    v = fs.vectors(h)

    def score(i: str, j: str) -> float:
        return sc.score_symmetric(v[i], v[j], fs.features(i, j))

    return score_all_pairs(sorted(fs.mentions), score)


def _side_pass(corpus: Corpus, model: CorefModel, stores, kind: str,
               config: Configuration, delta: float) -> int:
    """Update joint features for `kind`, score, merge. Returns merge count."""
    side = sorted((m for m in corpus.mentions.values()
                   if m.kind == kind and m.mention_id in _covered(config, kind)),
                  key=lambda m: m.mention_id)
    if len(side) < 2:
        return 0
    other_kind = "event" if kind == "entity" else "entity"
    static, ctx = stores
    fs = FeatureSpace(corpus, side, config.clusters(other_kind), static, ctx,
                      model.encoder, joint=model.cfg.joint)
    cache = neural_pair_cache(fs, model.scorer(kind))
    merged, n = merge_clusters(config.clusters(kind), cache, delta)
    config.set_clusters(kind, merged)
    return n


def _covered(config: Configuration, kind: str) -> set[str]:
    out: set[str] = set()
    for c in config.clusters(kind):
        out |= c
    return out


# -- training / inference over topics ---------------------------------------

def _topic_mentions(corpus: Corpus, doc_ids) -> tuple[list, list]:
    ents, evts = [], []
    for doc_id in sorted(doc_ids):
        ents.extend(corpus.doc_mentions(doc_id, "entity"))
        evts.extend(corpus.doc_mentions(doc_id, "event"))
    return ents, evts


def _check(config: Configuration, ents, evts) -> None:
    config.check({m.mention_id for m in ents}, {m.mention_id for m in evts})


def train(raw_corpus: Corpus, cfg: RunConfig,
          char_pretrained: dict[str, np.ndarray] | None = None) -> CorefModel:
    """Fit both pair scorers by simulating the clustering loop on gold topics."""
    corpus = augment_links(raw_corpus)
    topics = {t: docs for t, docs in corpus.topics().items() if t is not None}
    if not topics:
        raise ValueError("train: corpus has no gold topics")
    model = CorefModel(cfg, corpus_alphabet(corpus), char_pretrained)
    stores = open_stores(corpus, cfg)
    adam_e, adam_v = Adam(cfg.lr), Adam(cfg.lr)
    adam_char = Adam(cfg.lr)
    gold = {m.mention_id: m.gold_cluster_id for m in corpus.mentions.values()}
    pair_seed = cfg.seed

    for _ in range(cfg.passes):
        for topic_id in sorted(topics):
            ents, evts = _topic_mentions(corpus, topics[topic_id])
            config = Configuration(
                topic_id,
                entity_clusters=corpus_mod.init_entities(corpus, topics[topic_id],
                                                         "gold_wd"),
                event_clusters=corpus_mod.singleton_events(
                    topic_id, [m.mention_id for m in evts]),
            )
            _check(config, ents, evts)
            for _iteration in range(cfg.max_iterations):
                merges = 0
                for kind, adam_sc in (("entity", adam_e), ("event", adam_v)):
                    if cfg.reinit_scorers:
                        fresh = model._new_scorer(seed=cfg.seed + (1 if kind == "entity"
                                                                   else 2))
                        model.scorer(kind).params.update(
                            {k: v.copy() for k, v in fresh.params.items()})
                    side = ents if kind == "entity" else evts
                    other_kind = "event" if kind == "entity" else "entity"
                    if len(side) >= 2:
                        fs = FeatureSpace(corpus, sorted(side, key=lambda m: m.mention_id),
                                          config.clusters(other_kind), *stores,
                                          model.encoder, joint=cfg.joint)
                        pairs = make_training_pairs(config.clusters(kind), gold,
                                                    seed=pair_seed)
                        pair_seed += 1
                        if pairs:
                            train_scorer_on_pairs(fs, model.scorer(kind), pairs,
                                                  adam_sc, adam_char,
                                                  cfg.batch_size, cfg.epochs)
                    merges += _side_pass(corpus, model, stores, kind, config,
                                         cfg.delta_train)
                    _check(config, ents, evts)
                if merges == 0:
                    break
    return model


def infer(raw_corpus: Corpus, model: CorefModel, doc_topics: dict[str, str | int],
          entity_init: str = "wd_system") -> dict[str, Configuration]:
    """Cluster each predicted topic with the trained scorers."""
    corpus = augment_links(raw_corpus)
    cfg = model.cfg
    stores = open_stores(corpus, cfg)
    by_topic: dict[str, list[str]] = {}
    for doc_id, t in doc_topics.items():
        by_topic.setdefault(str(t), []).append(doc_id)
    out: dict[str, Configuration] = {}
    for topic_id in sorted(by_topic):
        doc_ids = by_topic[topic_id]
        ents, evts = _topic_mentions(corpus, doc_ids)
        config = Configuration(
            topic_id,
            entity_clusters=corpus_mod.init_entities(corpus, doc_ids, entity_init),
            event_clusters=corpus_mod.singleton_events(
                topic_id, [m.mention_id for m in evts]),
        )
        _check(config, ents, evts)
        for _iteration in range(cfg.max_iterations):
            merges = 0
            merges += _side_pass(corpus, model, stores, "entity", config,
                                 cfg.delta_infer)
            _check(config, ents, evts)
            merges += _side_pass(corpus, model, stores, "event", config,
                                 cfg.delta_infer)
            _check(config, ents, evts)
            if merges == 0:
                break
        out[topic_id] = config
    return out


def infer_with_score_fn(raw_corpus: Corpus, doc_topics: dict[str, str | int],
                        score_fn, delta: float, max_iterations: int = 10,
                        entity_init: str = "wd_system") -> dict[str, Configuration]:
    """The inference loop with a pluggable pair scorer.

    score_fn(kind, mention_id_a, mention_id_b) -> score in [0, 1]; feature
    assembly is skipped, so this supports oracle and baseline scorers.
    """
    corpus = raw_corpus
    by_topic: dict[str, list[str]] = {}
    for doc_id, t in doc_topics.items():
        by_topic.setdefault(str(t), []).append(doc_id)
    out: dict[str, Configuration] = {}
    for topic_id in sorted(by_topic):
        doc_ids = by_topic[topic_id]
        ents, evts = _topic_mentions(corpus, doc_ids)
        config = Configuration(
            topic_id,
            entity_clusters=corpus_mod.init_entities(corpus, doc_ids, entity_init),
            event_clusters=corpus_mod.singleton_events(
                topic_id, [m.mention_id for m in evts]),
        )
        for _iteration in range(max_iterations):
            merges = 0
            for kind, side in (("entity", ents), ("event", evts)):
                if len(side) < 2:
                    continue
                cache = score_all_pairs(
                    [m.mention_id for m in side],
                    lambda a, b, kind=kind: score_fn(kind, a, b))
                merged, n = merge_clusters(config.clusters(kind), cache, delta)
                config.set_clusters(kind, merged)
                merges += n
            _check(config, ents, evts)
            if merges == 0:
                break
        out[topic_id] = config
    return out


# -- vector dumping ----------------------------------------------------------

def dump_vectors(corpus: Corpus, model: CorefModel,
                 configs: dict[str, Configuration], path) -> None:
    """Write per-mention vectors (full plus named slices) as JSON lines."""
    corpus = augment_links(corpus)
    stores = open_stores(corpus, model.cfg)
    with open(path, "w", encoding="utf-8") as fh:
        for topic_id in sorted(configs):
            config = configs[topic_id]
            for kind in ("entity", "event"):
                other_kind = "event" if kind == "entity" else "entity"
                side = sorted((corpus.mentions[mid]
                               for mid in _covered(config, kind)),
                              key=lambda m: m.mention_id)
                if not side:
                    continue
                fs = FeatureSpace(corpus, side, config.clusters(other_kind),
                                  *stores, model.encoder, joint=model.cfg.joint)
                h = fs.encode_all()
                for m in side:
                    v = fs.vector(m.mention_id, h)
                    c_dim, s_dim = fs.ctx_dim, fs.span_dim
                    rec = {
                        "mention_id": m.mention_id, "kind": kind, "topic": topic_id,
                        "gold_cluster_id": m.gold_cluster_id,
                        "full": [float(x) for x in v],
                        "context": [float(x) for x in v[:c_dim]],
                        "span": [float(x) for x in v[c_dim:c_dim + s_dim]],
                        "dep": [float(x) for x in v[c_dim + s_dim:]],
                    }
                    fh.write(json.dumps(rec) + "\n")
