import json

import numpy as np
import pytest

from embed_export.cli import (EXIT_ERROR, EXIT_MISSING_FILE, EXIT_OK,
                              EXIT_USAGE, main)
from embed_export.corpus import (CorpusError, alphabet, load_corpus,
                                 vocabulary)
from embed_export.export import (TokenizationMismatch, export_chars,
                                 export_contextual, export_static)
from embed_export.formats import read_static, write_static
from embed_export.model import get_model


def write_corpus(path, docs):
    with open(path, "w", encoding="utf-8") as fh:
        for d in docs:
            fh.write(json.dumps(d) + "\n")
    return path


def sample_docs():
    def tok(s):
        return {"surface": s, "lemma": s.lower()}

    return [
        {"doc_id": "d1",
         "sentences": [[tok("Alice"), tok("met"), tok("Bob")],
                       [tok("no"), tok("mentions"), tok("here")]],
         "mentions": [
             {"mention_id": "m1", "kind": "entity", "sent_idx": 0,
              "start": 0, "end": 0, "head_idx": 0},
             {"mention_id": "m2", "kind": "event", "sent_idx": 0,
              "start": 1, "end": 1, "head_idx": 1}],
         "argument_links": []},
        {"doc_id": "d2",
         "sentences": [[tok("Bob"), tok("left")]],
         "mentions": [
             {"mention_id": "m3", "kind": "entity", "sent_idx": 0,
              "start": 0, "end": 0, "head_idx": 0}],
         "argument_links": []},
    ]


@pytest.fixture
def corpus_path(tmp_path):
    return write_corpus(tmp_path / "corpus.jsonl", sample_docs())


class TestCorpusReader:
    def test_load(self, corpus_path):
        docs = load_corpus(corpus_path)
        assert [d.doc_id for d in docs] == ["d1", "d2"]
        assert docs[0].sentences[0] == ["Alice", "met", "Bob"]
        assert docs[0].mention_sents == {0}
        assert docs[0].mention_heads == {(0, 0), (0, 1)}

    def test_vocabulary_and_alphabet(self, corpus_path):
        docs = load_corpus(corpus_path)
        assert "Alice" in vocabulary(docs) and "left" in vocabulary(docs)
        assert set("Aliceb ") <= set(alphabet(docs))

    def test_duplicate_doc_id(self, tmp_path):
        docs = sample_docs()
        docs[1]["doc_id"] = "d1"
        path = write_corpus(tmp_path / "dup.jsonl", docs)
        with pytest.raises(CorpusError, match="duplicate"):
            load_corpus(path)

    def test_bad_json_reports_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"doc_id": "d"\n')
        with pytest.raises(CorpusError, match="1"):
            load_corpus(path)


class TestExportStatic:
    def test_single_known_word(self, tmp_path):
        src = tmp_path / "src.txt"
        write_static({"alice": np.arange(300.0)}, src)
        out = tmp_path / "out.txt"
        n = export_static({"Alice", "unknown"}, src, out)
        assert n == 1
        table = read_static(out)
        assert list(table) == ["alice"]
        assert len(table["alice"]) == 300

    def test_empty_vocab_gives_empty_valid_file(self, tmp_path):
        src = tmp_path / "src.txt"
        write_static({"word": np.ones(4)}, src)
        out = tmp_path / "out.txt"
        assert export_static(set(), src, out) == 0
        assert out.read_text() == ""
        assert read_static(out) == {}

    def test_missing_source_raises(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            export_static({"a"}, tmp_path / "nope.txt", tmp_path / "out.txt")

    def test_round_trip_values(self, tmp_path):
        rng = np.random.default_rng(0)
        src_table = {w: rng.standard_normal(8) for w in ("alpha", "beta")}
        src = tmp_path / "src.txt"
        write_static(src_table, src)
        out = tmp_path / "out.txt"
        export_static({"alpha", "beta"}, src, out)
        got = read_static(out)
        for w in src_table:
            np.testing.assert_allclose(got[w], src_table[w], atol=1e-6)


class TestExportContextual:
    def test_records_cover_mention_sentences_only(self, tmp_path, corpus_path):
        docs = load_corpus(corpus_path)
        out = tmp_path / "ctx.bin"
        records = export_contextual(docs, "hash3-64", out)
        # d1 sentence 1 has no mentions: excluded; 3 + 2 tokens exported
        assert set(records) == {("d1", 0, 0), ("d1", 0, 1), ("d1", 0, 2),
                                ("d2", 0, 0), ("d2", 0, 1)}

    def test_deterministic(self, tmp_path, corpus_path):
        docs = load_corpus(corpus_path)
        a = export_contextual(docs, "hash3-64", tmp_path / "a.bin")
        b = export_contextual(docs, "hash3-64", tmp_path / "b.bin")
        assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()
        for k in a:
            np.testing.assert_array_equal(a[k], b[k])

    def test_vector_is_mean_of_three_layers(self, tmp_path, corpus_path):
        docs = load_corpus(corpus_path)
        records = export_contextual(docs, "hash3-64", tmp_path / "c.bin")
        model = get_model("hash3-64")
        layers = [model._layer(f"hash3-64|L{l}|d1|0|0|Alice") for l in range(3)]
        np.testing.assert_allclose(records[("d1", 0, 0)],
                                   np.mean(layers, axis=0))

    def test_published_dim_is_1024(self):
        assert get_model("hash3-1024").dim == 1024

    def test_dim_verified_at_export(self, corpus_path, tmp_path):
        docs = load_corpus(corpus_path)
        with pytest.raises(ValueError, match="dim"):
            export_contextual(docs, "hash3-64", tmp_path / "c.bin",
                              expected_dim=1024)

    def test_unknown_model(self, corpus_path, tmp_path):
        docs = load_corpus(corpus_path)
        with pytest.raises(ValueError, match="unknown contextual model"):
            export_contextual(docs, "no-such-model", tmp_path / "c.bin")

    def test_tokenization_mismatch_lists_sentence(self, corpus_path, tmp_path):
        docs = load_corpus(corpus_path)
        model = get_model("hash3-64")
        real = model.encode_sentence

        class Broken:
            dim = 64

            def encode_sentence(self, doc_id, sent_idx, tokens):
                return real(doc_id, sent_idx, tokens)[:-1]

        import embed_export.export as export_mod
        orig = export_mod.get_model
        export_mod.get_model = lambda _id: Broken()
        try:
            with pytest.raises(TokenizationMismatch, match="Alice met Bob"):
                export_contextual(docs, "hash3-64", tmp_path / "c.bin")
        finally:
            export_mod.get_model = orig


class TestExportChars:
    def test_one_vector_per_char(self, tmp_path):
        table = export_chars("abc", 16, tmp_path / "chars.txt")
        assert set(table) == {"a", "b", "c"}
        got = read_static(tmp_path / "chars.txt")
        assert set(got) == {"a", "b", "c"}
        for ch in table:
            np.testing.assert_allclose(got[ch], table[ch], atol=1e-6)
            assert np.linalg.norm(table[ch]) == pytest.approx(1.0)

    def test_deterministic_across_calls(self, tmp_path):
        a = export_chars("xy", 8, tmp_path / "a.txt", seed=3)
        b = export_chars("xy", 8, tmp_path / "b.txt", seed=3)
        for ch in a:
            np.testing.assert_array_equal(a[ch], b[ch])


class TestAtomicWrites:
    def test_no_temp_files_left(self, tmp_path, corpus_path):
        docs = load_corpus(corpus_path)
        export_contextual(docs, "hash3-64", tmp_path / "ctx.bin")
        export_chars("ab", 4, tmp_path / "chars.txt")
        leftovers = [p for p in tmp_path.iterdir()
                     if p.name.startswith(".tmp-")]
        assert leftovers == []

    def test_failed_export_leaves_no_output(self, tmp_path):
        docs = load_corpus(write_corpus(tmp_path / "c.jsonl", sample_docs()))
        out = tmp_path / "ctx.bin"
        with pytest.raises(ValueError):
            export_contextual(docs, "hash3-64", out, expected_dim=1024)
        assert not out.exists()


class TestCli:
    def test_full_export(self, tmp_path, corpus_path):
        src = tmp_path / "src.txt"
        write_static({"alice": np.ones(12), "bob": np.zeros(12)}, src)
        rc = main(["--corpus", str(corpus_path),
                   "--static-out", str(tmp_path / "static.txt"),
                   "--static-source", str(src),
                   "--ctx-out", str(tmp_path / "ctx.bin"),
                   "--ctx-model", "hash3-64",
                   "--chars-out", str(tmp_path / "chars.txt"),
                   "--char-dim", "8"])
        assert rc == EXIT_OK
        assert (tmp_path / "static.txt").exists()
        assert (tmp_path / "ctx.bin").exists()
        assert (tmp_path / "chars.txt").exists()

    def test_nothing_to_export_is_usage_error(self, corpus_path):
        assert main(["--corpus", str(corpus_path)]) == EXIT_USAGE

    def test_static_out_requires_source(self, corpus_path, tmp_path):
        rc = main(["--corpus", str(corpus_path),
                   "--static-out", str(tmp_path / "s.txt")])
        assert rc == EXIT_USAGE

    def test_missing_corpus(self, tmp_path):
        rc = main(["--corpus", str(tmp_path / "nope.jsonl"),
                   "--chars-out", str(tmp_path / "c.txt")])
        assert rc == EXIT_MISSING_FILE

    def test_unknown_model_is_error(self, corpus_path, tmp_path):
        rc = main(["--corpus", str(corpus_path),
                   "--ctx-out", str(tmp_path / "c.bin"),
                   "--ctx-model", "bogus"])
        assert rc == EXIT_ERROR
