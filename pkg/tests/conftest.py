import json

import pytest

from xcoref.corpus import Corpus, load_corpus


def make_doc(doc_id, sents, mentions=(), links=(), topic=None, wd=None):
    """Compact builder for one corpus-file document object.

    sents: list of sentences, each a list of token specs: either "surface"
    (lemma = surface) or ("surface", "lemma") or a full dict.
    mentions: (mention_id, kind, sent_idx, start, end, head_idx[, gold]).
    links: (event, entity, role).
    """
    def tok(t):
        if isinstance(t, dict):
            return t
        if isinstance(t, tuple):
            return {"surface": t[0], "lemma": t[1]}
        return {"surface": t, "lemma": t}

    obj = {"doc_id": doc_id, "sentences": [[tok(t) for t in s] for s in sents]}
    if topic is not None:
        obj["gold_topic_id"] = topic
    ms = []
    for m in mentions:
        d = {"mention_id": m[0], "kind": m[1], "sent_idx": m[2],
             "start": m[3], "end": m[4], "head_idx": m[5]}
        if len(m) > 6 and m[6] is not None:
            d["gold_cluster_id"] = m[6]
        ms.append(d)
    obj["mentions"] = ms
    obj["argument_links"] = [{"event": e, "entity": n, "role": r} for e, n, r in links]
    if wd is not None:
        obj["wd_entity_clusters"] = wd
    return obj


def write_corpus(path, docs):
    with open(path, "w", encoding="utf-8") as fh:
        for d in docs:
            fh.write(json.dumps(d) + "\n")
    return path


@pytest.fixture
def corpus_file(tmp_path):
    def _write(docs, name="corpus.jsonl"):
        return write_corpus(tmp_path / name, docs)
    return _write


def corpus_from(docs) -> Corpus:
    import tempfile
    import os
    fd, path = tempfile.mkstemp(suffix=".jsonl")
    os.close(fd)
    try:
        write_corpus(path, docs)
        return load_corpus(path)
    finally:
        os.unlink(path)
