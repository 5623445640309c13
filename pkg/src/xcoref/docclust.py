"""Document-to-topic clustering.

Documents are represented by TF-IDF weights over word 1-3-grams (stop words
removed before n-grams are formed), L2-normalized, and clustered with
K-Means. K can be fixed or selected by mean silhouette coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from sklearn.cluster import KMeans
from sklearn.metrics import (adjusted_rand_score, completeness_score,
                             homogeneity_score, silhouette_score, v_measure_score)

from .corpus import Corpus
from .stopwords import STOPWORDS


@dataclass
class DocVector:
    doc_id: str
    weights: dict[str, float]  # n-gram -> TF-IDF weight, L2-normalized


def doc_ngrams(doc) -> list[str]:
    """Lowercased 1-3-grams of a document's surface tokens, stop words removed."""
    toks = [t.surface.lower() for sent in doc.sentences for t in sent]
    toks = [t for t in toks if t not in STOPWORDS]
    grams = list(toks)
    for n in (2, 3):
        grams.extend(" ".join(toks[i:i + n]) for i in range(len(toks) - n + 1))
    return grams


def tfidf_vectors(corpus: Corpus) -> list[DocVector]:
    """TF-IDF with smoothed idf: idf(g) = ln((1+N)/(1+df(g))) + 1."""
    docs = list(corpus.documents.values())
    if not docs:
        raise ValueError("tfidf_vectors: empty corpus")
    counts = []
    df: dict[str, int] = {}
    for doc in docs:
        c: dict[str, int] = {}
        for g in doc_ngrams(doc):
            c[g] = c.get(g, 0) + 1
        counts.append(c)
        for g in c:
            df[g] = df.get(g, 0) + 1
    n = len(docs)
    out = []
    for doc, c in zip(docs, counts):
        w = {g: tf * (math.log((1 + n) / (1 + df[g])) + 1) for g, tf in c.items()}
        norm = math.sqrt(sum(v * v for v in w.values()))
        if norm > 0:
            w = {g: v / norm for g, v in w.items()}
        out.append(DocVector(doc.doc_id, w))
    return out


def _matrix(vectors: list[DocVector]) -> sparse.csr_matrix:
    vocab: dict[str, int] = {}
    rows, cols, data = [], [], []
    for i, dv in enumerate(vectors):
        for g, w in dv.weights.items():
            j = vocab.setdefault(g, len(vocab))
            rows.append(i)
            cols.append(j)
            data.append(w)
    return sparse.csr_matrix((data, (rows, cols)),
                             shape=(len(vectors), max(len(vocab), 1)))


def kmeans(vectors: list[DocVector], k: int, seed: int = 0) -> dict[str, int]:
    """K-Means (k-means++ init, 10 restarts, keep lowest inertia) on TF-IDF rows.

    Returns doc_id -> cluster index. Deterministic given the seed.
    """
    if not (1 <= k <= len(vectors)):
        raise ValueError(f"kmeans: K={k} out of range [1, {len(vectors)}]")
    x = _matrix(vectors)
    km = KMeans(n_clusters=k, n_init=10, random_state=seed).fit(x)
    return {dv.doc_id: int(lbl) for dv, lbl in zip(vectors, km.labels_)}


def select_k(vectors: list[DocVector], k_range, seed: int = 0) -> int:
    """The K in k_range with maximal mean silhouette coefficient; ties -> smaller K."""
    ks = sorted(set(int(k) for k in k_range))
    if not ks:
        raise ValueError("select_k: empty K range")
    n = len(vectors)
    if any(k < 2 or k > n - 1 for k in ks):
        raise ValueError(f"select_k: K range must lie within [2, {n - 1}]")
    x = _matrix(vectors)
    best_k, best_score = None, -np.inf
    for k in ks:
        labels = KMeans(n_clusters=k, n_init=10, random_state=seed).fit(x).labels_
        score = silhouette_score(x, labels)
        if score > best_score + 1e-12:
            best_k, best_score = k, score
    return best_k


def clustering_quality(pred: dict[str, int], gold: dict[str, str]) -> dict[str, float]:
    """Homogeneity / completeness / V-measure / adjusted Rand index."""
    if set(pred) != set(gold):
        raise ValueError("clustering_quality: pred and gold cover different documents")
    ids = sorted(pred)
    p = [pred[i] for i in ids]
    g = [gold[i] for i in ids]
    return {
        "homogeneity": float(homogeneity_score(g, p)),
        "completeness": float(completeness_score(g, p)),
        "v_measure": float(v_measure_score(g, p)),
        "ari": float(adjusted_rand_score(g, p)),
    }


def cluster_documents(corpus: Corpus, k: int | str = 20, seed: int = 0) -> dict[str, int]:
    """Full pipeline: TF-IDF -> (optional K selection) -> K-Means topics.

    k may be an int or "auto"; auto searches 2..min(25, n-1) by silhouette.
    """
    vectors = tfidf_vectors(corpus)
    n = len(vectors)
    if k == "auto":
        upper = min(25, n - 1)
        k = select_k(vectors, range(2, upper + 1), seed=seed) if upper >= 2 else 1
    k = min(int(k), n)
    return kmeans(vectors, k, seed=seed)
