"""Coreference evaluation: MUC, B-cubed, CEAF-e and their CoNLL average,
plus the head-lemma baseline and paired significance tests.

Partitions are given as iterables of mention-id sets covering the same
mention set; singleton clusters are included in scoring. Metrics are
computed over the union of all topics jointly, so erroneous cross-topic
links are counted against a system.

Conventions for degenerate denominators: MUC on all-singleton input has
zero links on both sides and is reported as R = P = F1 = 0.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .corpus import Corpus

Partition = list[set[str]]


@dataclass
class MetricScore:
    recall: float
    precision: float
    f1: float


@dataclass
class EvalReport:
    muc: MetricScore
    b_cubed: MetricScore
    ceaf_e: MetricScore
    conll_f1: float

    def to_dict(self) -> dict:
        return {
            "muc": vars(self.muc),
            "b_cubed": vars(self.b_cubed),
            "ceaf_e": vars(self.ceaf_e),
            "conll_f1": self.conll_f1,
        }


def _check_mention_sets(pred: Partition, gold: Partition) -> None:
    pm = set().union(*pred) if pred else set()
    gm = set().union(*gold) if gold else set()
    if pm != gm:
        raise ValueError(
            f"pred and gold cover different mentions "
            f"(only-pred {sorted(pm - gm)[:5]}, only-gold {sorted(gm - pm)[:5]})")


def _f1(r: float, p: float) -> float:
    return 0.0 if r + p == 0 else 2 * r * p / (r + p)


def muc(pred: Partition, gold: Partition) -> MetricScore:
    """Link-based metric: recall counts the merges needed to recover each gold
    cluster from its partition by the prediction; precision is symmetric."""
    _check_mention_sets(pred, gold)

    def directed(keys: Partition, resp: Partition) -> float:
        num = den = 0
        lookup = {m: idx for idx, c in enumerate(resp) for m in c}
        for k in keys:
            partitions = {lookup[m] for m in k}
            num += len(k) - len(partitions)
            den += len(k) - 1
        return num / den if den else 0.0

    r = directed(gold, pred)
    p = directed(pred, gold)
    return MetricScore(r, p, _f1(r, p))


def b_cubed(pred: Partition, gold: Partition) -> MetricScore:
    """Mention-based metric: per-mention overlap ratios, averaged."""
    _check_mention_sets(pred, gold)
    pred_of = {m: c for c in pred for m in c}
    gold_of = {m: c for c in gold for m in c}
    mentions = sorted(pred_of)
    if not mentions:
        return MetricScore(0.0, 0.0, 0.0)
    p = float(np.mean([len(pred_of[m] & gold_of[m]) / len(pred_of[m]) for m in mentions]))
    r = float(np.mean([len(pred_of[m] & gold_of[m]) / len(gold_of[m]) for m in mentions]))
    return MetricScore(r, p, _f1(r, p))


def phi4(a: set[str], b: set[str]) -> float:
    return 2.0 * len(a & b) / (len(a) + len(b))


def ceaf_e(pred: Partition, gold: Partition) -> MetricScore:
    """Entity-based metric with optimal one-to-one cluster alignment under phi4."""
    _check_mention_sets(pred, gold)
    if not pred or not gold:
        return MetricScore(0.0, 0.0, 0.0)
    sim = np.array([[phi4(g, p) for p in pred] for g in gold])
    rows, cols = linear_sum_assignment(-sim)
    total = float(sim[rows, cols].sum())
    r = total / len(gold)
    p = total / len(pred)
    return MetricScore(r, p, _f1(r, p))


def evaluate(pred: Partition, gold: Partition) -> EvalReport:
    m = muc(pred, gold)
    b = b_cubed(pred, gold)
    c = ceaf_e(pred, gold)
    return EvalReport(m, b, c, (m.f1 + b.f1 + c.f1) / 3.0)


def conll_f1(pred: Partition, gold: Partition) -> float:
    return evaluate(pred, gold).conll_f1


# -- head-lemma baseline -----------------------------------------------------

def lemma_baseline(corpus: Corpus, doc_topics: dict[str, str | int]
                   ) -> dict[str, dict[str, Partition]]:
    """Group same-kind mentions sharing a head lemma, within each topic.

    Returns topic -> kind -> partition.
    """
    by_topic: dict[str, list[str]] = {}
    for doc_id, t in doc_topics.items():
        by_topic.setdefault(str(t), []).append(doc_id)
    out: dict[str, dict[str, Partition]] = {}
    for topic_id, doc_ids in sorted(by_topic.items()):
        side: dict[str, Partition] = {}
        for kind in ("entity", "event"):
            groups: dict[str, set[str]] = {}
            for doc_id in doc_ids:
                for m in corpus.doc_mentions(doc_id, kind):
                    lemma = corpus.head_token(m).lemma.lower()
                    groups.setdefault(lemma, set()).add(m.mention_id)
            side[kind] = [groups[k] for k in sorted(groups)]
        out[topic_id] = side
    return out


# -- significance testing ----------------------------------------------------

def per_topic_conll(partition_by_topic: dict[str, Partition],
                    gold_by_topic: dict[str, Partition]) -> list[float]:
    return [conll_f1(partition_by_topic[t], gold_by_topic[t])
            for t in sorted(gold_by_topic)]


def significance(pred_a: dict[str, Partition], pred_b: dict[str, Partition],
                 gold: dict[str, Partition], n_resamples: int = 10000,
                 seed: int = 0) -> dict[str, float]:
    """Paired bootstrap and sign-flip permutation test over per-topic CoNLL F1.

    The inputs map topic id -> partition, with matching topic keys. Returned
    p-values are for the two-sided hypothesis that A and B differ
    (permutation) and the one-sided bootstrap probability that A <= B.
    """
    if set(pred_a) != set(gold) or set(pred_b) != set(gold):
        raise ValueError("significance: topic keys of predictions and gold differ")
    a = np.array(per_topic_conll(pred_a, gold))
    b = np.array(per_topic_conll(pred_b, gold))
    diffs = a - b
    n = len(diffs)
    rng = random.Random(seed)

    observed = float(diffs.mean())
    boot_le = 0
    perm_ge = 0
    for _ in range(n_resamples):
        idx = [rng.randrange(n) for _ in range(n)]
        if diffs[idx].mean() <= 0:
            boot_le += 1
        signs = np.array([1 if rng.random() < 0.5 else -1 for _ in range(n)])
        if abs((diffs * signs).mean()) >= abs(observed):
            perm_ge += 1
    return {
        "mean_diff": observed,
        "bootstrap_p": (boot_le + 1) / (n_resamples + 1),
        "permutation_p": (perm_ge + 1) / (n_resamples + 1),
    }
