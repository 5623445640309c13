import math

import numpy as np
import pytest

from xcoref.docclust import (clustering_quality, cluster_documents, kmeans,
                             select_k, tfidf_vectors)

from conftest import corpus_from, make_doc


def _corpus_of(word_lists):
    return corpus_from([
        make_doc(f"d{i}", [[w for w in words]]) for i, words in enumerate(word_lists)
    ])


def _group_corpus(n_groups=3, docs_per_group=4, words=6):
    """Disjoint vocabularies per group; K-Means must recover the groups."""
    word_lists, gold = [], {}
    idx = 0
    for g in range(n_groups):
        vocab = [f"word{g}x{k}" for k in range(words)]
        for d in range(docs_per_group):
            word_lists.append(vocab[d % words:] + vocab[:d % words])
            gold[f"d{idx}"] = f"g{g}"
            idx += 1
    return _corpus_of(word_lists), gold


class TestTfidf:
    def test_single_document_unit_norm(self):
        vecs = tfidf_vectors(_corpus_of([["apple", "banana", "apple"]]))
        assert len(vecs) == 1
        norm = math.sqrt(sum(w * w for w in vecs[0].weights.values()))
        assert norm == pytest.approx(1.0)

    def test_idf_monotone_in_document_frequency(self):
        corpus = _corpus_of([["common", "rare"], ["common"], ["common"]])
        vecs = tfidf_vectors(corpus)
        w = vecs[0].weights
        # both appear once in doc 0; the rarer term must get more weight
        assert w["rare"] > w["common"]

    def test_identical_documents_identical_vectors(self):
        vecs = tfidf_vectors(_corpus_of([["same", "words"], ["same", "words"]]))
        assert vecs[0].weights == vecs[1].weights
        cos = sum(vecs[0].weights[g] * vecs[1].weights[g] for g in vecs[0].weights)
        assert cos == pytest.approx(1.0)

    def test_stop_words_excluded(self):
        vecs = tfidf_vectors(_corpus_of([["the", "apple"]]))
        assert "the" not in vecs[0].weights
        assert "apple" in vecs[0].weights

    def test_ngrams_up_to_three(self):
        vecs = tfidf_vectors(_corpus_of([["a1", "b2", "c3", "d4"]]))
        grams = set(vecs[0].weights)
        assert "a1 b2" in grams and "b2 c3 d4" in grams
        assert not any(len(g.split()) > 3 for g in grams)

    def test_weights_finite_nonnegative(self):
        for dv in tfidf_vectors(_corpus_of([["x", "y"], ["x"]])):
            assert all(np.isfinite(w) and w >= 0 for w in dv.weights.values())


class TestKMeans:
    def test_k_equals_n_docs_gives_singletons(self):
        corpus, _ = _group_corpus(2, 2)
        vecs = tfidf_vectors(corpus)
        labels = kmeans(vecs, k=len(vecs), seed=0)
        assert len(set(labels.values())) == len(vecs)

    def test_k_one_single_cluster(self):
        corpus, _ = _group_corpus(2, 2)
        labels = kmeans(tfidf_vectors(corpus), k=1)
        assert set(labels.values()) == {0}

    def test_disjoint_vocabularies_recovered(self):
        corpus, gold = _group_corpus(2, 5)
        labels = kmeans(tfidf_vectors(corpus), k=2, seed=0)
        by_gold = {}
        for doc_id, g in gold.items():
            by_gold.setdefault(g, set()).add(labels[doc_id])
        groups = list(by_gold.values())
        assert all(len(g) == 1 for g in groups)
        assert groups[0] != groups[1]

    def test_deterministic_given_seed(self):
        corpus, _ = _group_corpus(3, 4)
        vecs = tfidf_vectors(corpus)
        assert kmeans(vecs, 3, seed=7) == kmeans(vecs, 3, seed=7)

    def test_k_out_of_range(self):
        corpus, _ = _group_corpus(1, 3)
        with pytest.raises(ValueError, match="out of range"):
            kmeans(tfidf_vectors(corpus), k=4)


class TestSelectK:
    def test_three_groups_selects_three(self):
        corpus, _ = _group_corpus(3, 5)
        assert select_k(tfidf_vectors(corpus), range(2, 7), seed=0) == 3

    def test_singleton_range(self):
        corpus, _ = _group_corpus(2, 4)
        assert select_k(tfidf_vectors(corpus), [2], seed=0) == 2

    def test_empty_range_raises(self):
        corpus, _ = _group_corpus(2, 4)
        with pytest.raises(ValueError, match="empty"):
            select_k(tfidf_vectors(corpus), [])


class TestClusteringQuality:
    def test_perfect_prediction(self):
        pred = {"a": 0, "b": 0, "c": 1}
        gold = {"a": "x", "b": "x", "c": "y"}
        q = clustering_quality(pred, gold)
        assert all(v == pytest.approx(1.0) for v in q.values())

    def test_singletons_vs_one_cluster(self):
        pred = {"a": 0, "b": 1, "c": 2}
        gold = {"a": "x", "b": "x", "c": "x"}
        q = clustering_quality(pred, gold)
        assert q["homogeneity"] == pytest.approx(1.0)
        assert q["completeness"] == pytest.approx(0.0)

    def test_ari_zero_case(self):
        # pred {a,b},{c} vs gold {a,b,c}: index == expected index -> ARI 0
        q = clustering_quality({"a": 0, "b": 0, "c": 1},
                               {"a": "x", "b": "x", "c": "x"})
        assert q["ari"] == pytest.approx(0.0)

    def test_invariant_under_relabeling(self):
        pred = {"a": 0, "b": 0, "c": 1, "d": 2}
        gold = {"a": "x", "b": "x", "c": "y", "d": "y"}
        relabeled = {k: {0: 9, 1: 4, 2: 7}[v] for k, v in pred.items()}
        assert clustering_quality(pred, gold) == clustering_quality(relabeled, gold)

    def test_mismatched_doc_sets_raise(self):
        with pytest.raises(ValueError, match="different documents"):
            clustering_quality({"a": 0}, {"b": "x"})


def test_cluster_documents_auto_recovers_group_count():
    corpus, gold = _group_corpus(3, 5)
    labels = cluster_documents(corpus, k="auto", seed=0)
    q = clustering_quality(labels, gold)
    assert q["v_measure"] == pytest.approx(1.0)
