"""The xcoref command line: doc-cluster / train / infer / score / baseline /
export-vectors subcommands sharing a YAML run-config (flags > file > defaults)."""

from __future__ import annotations

import argparse
import datetime
import json
import sys

from . import docclust, engine, metrics, report
from .config import RunConfig
from .corpus import CorpusError, load_corpus

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3
EXIT_INVARIANT = 4


def _meta(cfg: RunConfig | None) -> dict:
    out = {"meta": {"timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat()}}
    if cfg is not None:
        out["config"] = cfg.to_dict()
    return out


def _write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)


def _load_config(args, **over) -> RunConfig:
    overrides = {k: getattr(args, k, None) for k in
                 ("seed", "lr", "batch_size", "epochs", "passes", "max_iterations",
                  "word_dim", "char_dim", "char_hidden", "ctx_dim", "femb_dim",
                  "hidden", "delta_train", "delta_infer", "static_vectors",
                  "ctx_vectors", "char_vectors", "workers")}
    if getattr(args, "disjoint", False):
        overrides["joint"] = False
    if getattr(args, "reinit_scorers", False):
        overrides["reinit_scorers"] = True
    overrides.update(over)
    return RunConfig.load(getattr(args, "config", None), overrides)


def _clusters_payload(configs: dict, cfg: RunConfig | None) -> dict:
    mentions: dict[str, dict] = {}
    for topic_id in sorted(configs):
        c = configs[topic_id]
        for kind in ("entity", "event"):
            for i, cluster in enumerate(c.clusters(kind)):
                cid = f"{topic_id}:{kind[0]}{i}"
                for mid in sorted(cluster):
                    mentions[mid] = {"kind": kind, "cluster": cid}
    return {"mentions": mentions, **_meta(cfg)}


def _partition_from_clusters(obj: dict, kind: str) -> list[set[str]]:
    groups: dict[str, set[str]] = {}
    for mid, rec in obj["mentions"].items():
        if rec["kind"] == kind:
            groups.setdefault(rec["cluster"], set()).add(mid)
    return [groups[k] for k in sorted(groups)]


def _gold_partition_for(corpus, kind: str) -> list[set[str]]:
    groups: dict[str, set[str]] = {}
    for m in corpus.mentions_of_kind(kind):
        if m.gold_cluster_id is None:
            raise CorpusError(f"mention {m.mention_id}: missing gold_cluster_id")
        groups.setdefault(m.gold_cluster_id, set()).add(m.mention_id)
    return [groups[k] for k in sorted(groups)]


def _resolve_topics(args, corpus, cfg: RunConfig) -> dict[str, str | int]:
    spec = args.topics
    if spec == "gold":
        topics = {}
        for d in corpus.documents.values():
            if d.gold_topic_id is None:
                raise CorpusError(f"doc {d.doc_id}: --topics gold but no gold_topic_id")
            topics[d.doc_id] = d.gold_topic_id
        return topics
    if spec == "auto":
        return docclust.cluster_documents(corpus, k=cfg.k, seed=cfg.seed)
    with open(spec, encoding="utf-8") as fh:
        payload = json.load(fh)
    return payload["topics"] if "topics" in payload else payload


# -- subcommands -------------------------------------------------------------

def cmd_doc_cluster(args) -> int:
    cfg = _load_config(args, k=args.k)
    corpus = load_corpus(args.corpus)
    vectors = docclust.tfidf_vectors(corpus)
    n = len(vectors)
    if args.k == "auto":
        upper = min(25, n - 1)
        ks = range(2, upper + 1)
        scores = {}
        from sklearn.metrics import silhouette_score
        x = docclust._matrix(vectors)
        from sklearn.cluster import KMeans
        for k in ks:
            labels = KMeans(n_clusters=k, n_init=10, random_state=cfg.seed).fit(x).labels_
            scores[k] = float(silhouette_score(x, labels))
        chosen = docclust.select_k(vectors, ks, seed=cfg.seed)
        if args.report_dir:
            report.write_silhouette_figure(scores, chosen, args.report_dir)
    else:
        chosen = min(int(args.k), n)
    topics = docclust.kmeans(vectors, chosen, seed=cfg.seed)
    _write_json(args.out, {"topics": topics, "k": chosen, **_meta(cfg)})
    print(f"clustered {n} documents into {chosen} topics -> {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _load_config(args)
    corpus = load_corpus(args.corpus)
    char_pre = engine.load_char_pretrained(cfg.char_vectors) if cfg.char_vectors else None
    model = engine.train(corpus, cfg, char_pre)
    model.save(args.out)
    print(f"trained model -> {args.out}")
    return EXIT_OK


def cmd_infer(args) -> int:
    model = engine.CorefModel.load(args.model)
    cfg = model.cfg
    corpus = load_corpus(args.corpus)
    topics = _resolve_topics(args, corpus, cfg)
    configs = engine.infer(corpus, model, topics, entity_init=args.entity_init)
    _write_json(args.out, _clusters_payload(configs, cfg))
    if args.dump_vectors:
        engine.dump_vectors(corpus, model, configs, args.dump_vectors)
    print(f"clustered {len(corpus.mentions)} mentions -> {args.out}")
    return EXIT_OK


def cmd_score(args) -> int:
    corpus = load_corpus(args.gold)
    with open(args.pred, encoding="utf-8") as fh:
        pred_obj = json.load(fh)
    pred = _partition_from_clusters(pred_obj, args.kind)
    gold = _gold_partition_for(corpus, args.kind)
    rep = metrics.evaluate(pred, gold)
    print(report.report_table(rep, name=args.kind))
    payload = {"kind": args.kind, **rep.to_dict(), **_meta(None)}
    if args.out:
        _write_json(args.out, payload)
    if args.report_dir:
        report.write_report(rep, args.report_dir, name=args.kind)
    return EXIT_OK


def cmd_baseline(args) -> int:
    cfg = _load_config(args)
    corpus = load_corpus(args.corpus)
    topics = _resolve_topics(args, corpus, cfg)
    parts = metrics.lemma_baseline(corpus, topics)
    mentions: dict[str, dict] = {}
    for topic_id in sorted(parts):
        for kind in ("entity", "event"):
            for i, cluster in enumerate(parts[topic_id][kind]):
                cid = f"{topic_id}:{kind[0]}{i}"
                for mid in sorted(cluster):
                    mentions[mid] = {"kind": kind, "cluster": cid}
    _write_json(args.out, {"mentions": mentions, **_meta(cfg)})
    print(f"lemma baseline clusters -> {args.out}")
    return EXIT_OK


def cmd_export_vectors(args) -> int:
    model = engine.CorefModel.load(args.model)
    corpus = load_corpus(args.corpus)
    with open(args.clusters, encoding="utf-8") as fh:
        obj = json.load(fh)
    # rebuild per-topic configurations from a clusters file
    from .corpus import Configuration
    by_topic: dict[str, Configuration] = {}
    groups: dict[tuple[str, str], dict[str, set[str]]] = {}
    for mid, rec in obj["mentions"].items():
        topic_id = rec["cluster"].rsplit(":", 1)[0]
        groups.setdefault((topic_id, rec["kind"]), {}).setdefault(
            rec["cluster"], set()).add(mid)
    topic_ids = {t for (t, _k) in groups}
    for t in sorted(topic_ids):
        by_topic[t] = Configuration(
            t,
            entity_clusters=[frozenset(c) for c in
                             groups.get((t, "entity"), {}).values()],
            event_clusters=[frozenset(c) for c in
                            groups.get((t, "event"), {}).values()],
        )
    engine.dump_vectors(corpus, model, by_topic, args.out)
    print(f"mention vectors -> {args.out}")
    return EXIT_OK


# -- argument parsing --------------------------------------------------------

def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML run-config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--passes", type=int)
    p.add_argument("--max-iterations", dest="max_iterations", type=int)
    p.add_argument("--word-dim", dest="word_dim", type=int)
    p.add_argument("--char-dim", dest="char_dim", type=int)
    p.add_argument("--char-hidden", dest="char_hidden", type=int)
    p.add_argument("--ctx-dim", dest="ctx_dim", type=int)
    p.add_argument("--femb-dim", dest="femb_dim", type=int)
    p.add_argument("--hidden", type=int)
    p.add_argument("--delta-train", dest="delta_train", type=float)
    p.add_argument("--delta-infer", dest="delta_infer", type=float)
    p.add_argument("--static-vectors", dest="static_vectors")
    p.add_argument("--ctx-vectors", dest="ctx_vectors")
    p.add_argument("--char-vectors", dest="char_vectors")
    p.add_argument("--workers", type=int)
    p.add_argument("--disjoint", action="store_true",
                   help="ablate the dependency vectors and pair features")
    p.add_argument("--reinit-scorers", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xcoref",
                                description="Cross-document entity and event "
                                            "coreference resolution")
    sub = p.add_subparsers(dest="command", required=True)

    dc = sub.add_parser("doc-cluster", help="cluster documents into topics")
    dc.add_argument("--corpus", required=True)
    dc.add_argument("--k", default="20", help='topic count or "auto"')
    dc.add_argument("--out", required=True)
    dc.add_argument("--report-dir")
    _add_config_flags(dc)
    dc.set_defaults(func=cmd_doc_cluster)

    tr = sub.add_parser("train", help="train the pair scorers on gold topics")
    tr.add_argument("--corpus", required=True)
    tr.add_argument("--out", required=True)
    _add_config_flags(tr)
    tr.set_defaults(func=cmd_train)

    inf = sub.add_parser("infer", help="cluster mentions with a trained model")
    inf.add_argument("--corpus", required=True)
    inf.add_argument("--model", required=True)
    inf.add_argument("--topics", default="auto",
                     help='"auto", "gold", or a topics.json path')
    inf.add_argument("--entity-init", dest="entity_init", default="wd_system",
                     choices=["wd_system", "gold_wd"])
    inf.add_argument("--out", required=True)
    inf.add_argument("--dump-vectors", dest="dump_vectors")
    inf.set_defaults(func=cmd_infer)

    sc = sub.add_parser("score", help="evaluate predicted clusters against gold")
    sc.add_argument("--gold", required=True, help="gold corpus JSON-lines file")
    sc.add_argument("--pred", required=True, help="predicted clusters.json")
    sc.add_argument("--kind", required=True, choices=["entity", "event"])
    sc.add_argument("--out")
    sc.add_argument("--report-dir")
    sc.set_defaults(func=cmd_score)

    bl = sub.add_parser("baseline", help="head-lemma baseline within topics")
    bl.add_argument("--corpus", required=True)
    bl.add_argument("--topics", default="auto")
    bl.add_argument("--out", required=True)
    _add_config_flags(bl)
    bl.set_defaults(func=cmd_baseline)

    ev = sub.add_parser("export-vectors", help="dump mention vectors as JSON lines")
    ev.add_argument("--corpus", required=True)
    ev.add_argument("--model", required=True)
    ev.add_argument("--clusters", required=True)
    ev.add_argument("--out", required=True)
    ev.set_defaults(func=cmd_export_vectors)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename or exc}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except CorpusError as exc:
        print(f"error: corpus invariant: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
