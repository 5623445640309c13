import numpy as np
import pytest

from xcoref.deps import augment_links, dep_vector, pair_features, role_slots

from conftest import corpus_from, make_doc


def _links_of(corpus, event_id):
    return {(l.role, l.entity, l.source)
            for l in corpus.argument_links if l.event == event_id}


class TestAugmentLinks:
    def test_srl_links_never_overwritten(self):
        corpus = corpus_from([make_doc(
            "d", [["Alice", "met", "Bob"]],
            mentions=[("a", "entity", 0, 0, 0, 0), ("b", "entity", 0, 2, 2, 2),
                      ("v", "event", 0, 1, 1, 1)],
            links=[("v", "b", "Arg0")])])
        out = augment_links(corpus)
        assert ("Arg0", "b", "srl") in _links_of(out, "v")
        assert not any(r == "Arg0" and s == "heuristic"
                       for r, _, s in _links_of(out, "v"))

    def test_nearest_left_right_fallback(self):
        corpus = corpus_from([make_doc(
            "d", [["e1", "v", "e2"]],
            mentions=[("e1", "entity", 0, 0, 0, 0), ("e2", "entity", 0, 2, 2, 2),
                      ("v", "event", 0, 1, 1, 1)])])
        out = augment_links(corpus)
        assert _links_of(out, "v") == {("Arg0", "e1", "heuristic"),
                                       ("Arg1", "e2", "heuristic")}

    def test_nearest_wins_among_several(self):
        corpus = corpus_from([make_doc(
            "d", [["far", "near", "v", "close", "distant"]],
            mentions=[("far", "entity", 0, 0, 0, 0), ("near", "entity", 0, 1, 1, 1),
                      ("close", "entity", 0, 3, 3, 3),
                      ("distant", "entity", 0, 4, 4, 4),
                      ("v", "event", 0, 2, 2, 2)])])
        out = augment_links(corpus)
        assert _links_of(out, "v") == {("Arg0", "near", "heuristic"),
                                       ("Arg1", "close", "heuristic")}

    def test_possessor_heuristic(self):
        corpus = corpus_from([make_doc(
            "d", [[{"surface": "Amazon", "lemma": "amazon", "possessor_of": 2},
                   "'s", "acquisition"]],
            mentions=[("amz", "entity", 0, 0, 0, 0),
                      ("acq", "event", 0, 2, 2, 2)])])
        out = augment_links(corpus)
        assert ("Arg0", "amz", "heuristic") in _links_of(out, "acq")

    def test_subject_object_heuristic(self):
        corpus = corpus_from([make_doc(
            "d", [[{"surface": "Alice", "lemma": "alice", "subj_of": 1},
                   "bought",
                   "a",
                   {"surface": "house", "lemma": "house", "obj_of": 1}]],
            mentions=[("al", "entity", 0, 0, 0, 0), ("hs", "entity", 0, 3, 3, 3),
                      ("buy", "event", 0, 1, 1, 1)])])
        out = augment_links(corpus)
        links = _links_of(out, "buy")
        assert ("Arg0", "al", "heuristic") in links
        assert ("Arg1", "hs", "heuristic") in links

    def test_heuristic_order_possessor_beats_fallback(self):
        # possessor entity is to the right; fallback alone would pick "left"
        corpus = corpus_from([make_doc(
            "d", [["left", "acquisition", "by",
                   {"surface": "Amazon", "lemma": "amazon", "possessor_of": 1}]],
            mentions=[("l", "entity", 0, 0, 0, 0), ("amz", "entity", 0, 3, 3, 3),
                      ("acq", "event", 0, 1, 1, 1)])])
        out = augment_links(corpus)
        assert ("Arg0", "amz", "heuristic") in _links_of(out, "acq")


class TestRoleSlots:
    def _corpus(self):
        return corpus_from([make_doc(
            "d", [["Alice", "met", "Bob", "and", "greeted", "Carol"]],
            mentions=[("al", "entity", 0, 0, 0, 0), ("bo", "entity", 0, 2, 2, 2),
                      ("ca", "entity", 0, 5, 5, 5),
                      ("met", "event", 0, 1, 1, 1), ("greet", "event", 0, 4, 4, 4)],
            links=[("met", "al", "Arg0"), ("met", "bo", "Arg1"),
                   ("greet", "al", "Arg0"), ("greet", "ca", "Arg1")])])

    def test_event_slots(self):
        corpus = self._corpus()
        slots = role_slots(corpus, corpus.mentions["met"])
        assert slots == {"Arg0": "al", "Arg1": "bo", "Loc": None, "Time": None}

    def test_entity_slot_picks_nearest_event(self):
        corpus = self._corpus()
        # "al" is Arg0 of both events; "met" head (idx 1) is nearer than "greet" (4)
        slots = role_slots(corpus, corpus.mentions["al"])
        assert slots["Arg0"] == "met"


def _dep_corpus():
    return corpus_from([make_doc(
        "d", [["x", "y", "v1", "v2"]],
        mentions=[("x", "entity", 0, 0, 0, 0), ("y", "entity", 0, 1, 1, 1),
                  ("v1", "event", 0, 2, 2, 2), ("v2", "event", 0, 3, 3, 3)],
        links=[("v1", "x", "Arg1"), ("v2", "y", "Arg1")])])


class TestDepVector:
    def _spans(self, dim=3, seed=0):
        rng = np.random.default_rng(seed)
        return {m: rng.standard_normal(dim) for m in ("x", "y", "v1", "v2")}

    def test_all_slots_empty_gives_zero(self):
        corpus = _dep_corpus()
        spans = self._spans()
        corpus_no_links = corpus.with_links([])
        d = dep_vector(corpus_no_links, corpus.mentions["v1"],
                       [frozenset(["x"]), frozenset(["y"])], spans)
        np.testing.assert_array_equal(d, np.zeros(4 * 3))

    def test_singleton_filler_cluster_is_its_span(self):
        corpus = _dep_corpus()
        spans = self._spans()
        d = dep_vector(corpus, corpus.mentions["v1"],
                       [frozenset(["x"]), frozenset(["y"])], spans)
        np.testing.assert_array_equal(d[3:6], spans["x"])  # Arg1 block
        np.testing.assert_array_equal(d[:3], np.zeros(3))  # Arg0 empty

    def test_two_member_cluster_averaged(self):
        corpus = _dep_corpus()
        spans = self._spans()
        d = dep_vector(corpus, corpus.mentions["v1"], [frozenset(["x", "y"])], spans)
        np.testing.assert_allclose(d[3:6], (spans["x"] + spans["y"]) / 2)

    def test_unrelated_cluster_changes_ignored(self):
        corpus = _dep_corpus()
        spans = self._spans()
        m = corpus.mentions["v1"]
        d1 = dep_vector(corpus, m, [frozenset(["x"]), frozenset(["y"])], spans)
        d2 = dep_vector(corpus, m, [frozenset(["x"]), frozenset(["y"])],
                        spans)  # same
        # y's cluster is irrelevant to v1 (whose only filler is x)
        d3 = dep_vector(corpus, m, [frozenset(["x"])], {**spans})
        np.testing.assert_array_equal(d1, d2)
        np.testing.assert_array_equal(d1, d3)

    def test_member_order_invariant(self):
        corpus = _dep_corpus()
        spans = self._spans()
        m = corpus.mentions["v1"]
        a = dep_vector(corpus, m, [frozenset(["x", "y"])], spans)
        b = dep_vector(corpus, m, [frozenset(["y", "x"])], spans)
        np.testing.assert_array_equal(a, b)


class TestPairFeatures:
    def test_same_filler_mention_is_true(self):
        corpus = corpus_from([make_doc(
            "d", [["x", "v1", "v2"]],
            mentions=[("x", "entity", 0, 0, 0, 0),
                      ("v1", "event", 0, 1, 1, 1), ("v2", "event", 0, 2, 2, 2)],
            links=[("v1", "x", "Arg0"), ("v2", "x", "Arg0")])])
        f = pair_features(corpus, corpus.mentions["v1"], corpus.mentions["v2"],
                          [frozenset(["x"])])
        assert f == (True, False, False, False)

    def test_different_clusters_false_and_merge_flips(self):
        corpus = _dep_corpus()
        mi, mj = corpus.mentions["v1"], corpus.mentions["v2"]
        before = pair_features(corpus, mi, mj, [frozenset(["x"]), frozenset(["y"])])
        after = pair_features(corpus, mi, mj, [frozenset(["x", "y"])])
        assert before == (False, False, False, False)
        assert after == (False, True, False, False)

    def test_symmetric(self):
        corpus = _dep_corpus()
        mi, mj = corpus.mentions["v1"], corpus.mentions["v2"]
        clusters = [frozenset(["x", "y"])]
        assert pair_features(corpus, mi, mj, clusters) == \
            pair_features(corpus, mj, mi, clusters)

    def test_kind_mismatch_rejected(self):
        corpus = _dep_corpus()
        with pytest.raises(ValueError, match="kind"):
            pair_features(corpus, corpus.mentions["x"], corpus.mentions["v1"], [])
