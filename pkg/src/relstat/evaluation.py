"""Ranking metrics (NDCG@10, P@10, MRR@10, MAP) and significance testing.

All metrics use binary gains. NDCG discounts with log2(rank + 1) and
normalizes by the ideal binary ranking; MAP runs over the full ranking depth
while the other three cut off at k. Unjudged documents count as non-relevant.
Topics without any relevant document are excluded from aggregation and
reported separately.

System comparisons use a two-sided paired t-test over per-topic metric
values with Bonferroni correction (p_corrected = min(1, p_raw * n)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .corpus import QrelEntry, RunEntry
from .errors import ValidationError

METRIC_NAMES = ("ndcg10", "p10", "mrr10", "map")


def _relevant_set(qrels: Sequence[QrelEntry]) -> set[str]:
    return {q.doc_id for q in qrels if q.label == 1}


def ndcg_at_k(ranking: Sequence[str], relevant: set[str], k: int = 10) -> float:
    """Binary NDCG@k; 0.0 when nothing relevant is retrieved in the top k."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if not relevant:
        raise ValidationError("ndcg undefined for a topic with no relevant docs")
    dcg = sum(1.0 / math.log2(i + 2)
              for i, doc_id in enumerate(ranking[:k]) if doc_id in relevant)
    idcg = sum(1.0 / math.log2(i + 2) for i in range(min(len(relevant), k)))
    return dcg / idcg


def precision_at_k(ranking: Sequence[str], relevant: set[str], k: int = 10) -> float:
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    return sum(1 for doc_id in ranking[:k] if doc_id in relevant) / k


def mrr_at_k(ranking: Sequence[str], relevant: set[str], k: int = 10) -> float:
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    for i, doc_id in enumerate(ranking[:k]):
        if doc_id in relevant:
            return 1.0 / (i + 1)
    return 0.0


def average_precision(ranking: Sequence[str], relevant: set[str]) -> float:
    """AP over the full ranking depth, normalized by the total relevant count."""
    if not relevant:
        raise ValidationError("AP undefined for a topic with no relevant docs")
    hits = 0
    total = 0.0
    for i, doc_id in enumerate(ranking):
        if doc_id in relevant:
            hits += 1
            total += hits / (i + 1)
    return total / len(relevant)


@dataclass(frozen=True)
class TopicMetrics:
    topic_id: str
    ndcg10: float
    p10: float
    mrr10: float
    map: float

    def value(self, metric: str) -> float:
        if metric not in METRIC_NAMES:
            raise ValidationError(f"unknown metric {metric!r}")
        return getattr(self, metric)


@dataclass(frozen=True)
class EvalReport:
    run_tag: str
    topics: tuple[TopicMetrics, ...]
    aggregate: dict[str, float]
    excluded_topics: tuple[str, ...]  # qrels topics with zero relevant docs

    def to_dict(self) -> dict:
        return {
            "run_tag": self.run_tag,
            "n_topics_evaluated": len(self.topics),
            "aggregate": {m: self.aggregate[m] for m in METRIC_NAMES},
            "topics": [
                {"topic_id": t.topic_id, "ndcg10": t.ndcg10, "p10": t.p10,
                 "mrr10": t.mrr10, "map": t.map}
                for t in self.topics
            ],
            "excluded_topics": list(self.excluded_topics),
        }


def evaluate_run(run: Sequence[RunEntry], qrels: Sequence[QrelEntry],
                 k: int = 10) -> EvalReport:
    """Per-topic metrics plus means over all topics with >= 1 relevant doc.

    Topics present in the qrels but missing from the run contribute zeros;
    run topics without qrels are ignored. Disjoint topic sets are an error.
    """
    qrels_by_topic: dict[str, list[QrelEntry]] = {}
    for entry in qrels:
        qrels_by_topic.setdefault(entry.topic_id, []).append(entry)
    run_by_topic: dict[str, list[RunEntry]] = {}
    for entry in run:
        run_by_topic.setdefault(entry.topic_id, []).append(entry)
    if not set(qrels_by_topic) & set(run_by_topic):
        raise ValidationError("run and qrels share no topic")

    tag = run[0].tag if run else "run"
    topics: list[TopicMetrics] = []
    excluded: list[str] = []
    for topic_id in sorted(qrels_by_topic):
        relevant = _relevant_set(qrels_by_topic[topic_id])
        if not relevant:
            excluded.append(topic_id)
            continue
        entries = sorted(run_by_topic.get(topic_id, []), key=lambda e: e.rank)
        ranking = [e.doc_id for e in entries]
        if ranking:
            topics.append(TopicMetrics(
                topic_id=topic_id,
                ndcg10=ndcg_at_k(ranking, relevant, k),
                p10=precision_at_k(ranking, relevant, k),
                mrr10=mrr_at_k(ranking, relevant, k),
                map=average_precision(ranking, relevant),
            ))
        else:
            topics.append(TopicMetrics(topic_id, 0.0, 0.0, 0.0, 0.0))
    if not topics:
        raise ValidationError("no topic with relevant documents to evaluate")
    aggregate = {
        metric: sum(t.value(metric) for t in topics) / len(topics)
        for metric in METRIC_NAMES
    }
    return EvalReport(run_tag=tag, topics=tuple(topics), aggregate=aggregate,
                      excluded_topics=tuple(excluded))


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    p_value: float
    degenerate: bool = False  # all diffs equal and nonzero: zero variance


def paired_ttest(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-sided paired t-test over per-topic differences.

    Identical samples give (t=0, p=1). Nonzero differences with zero variance
    have no finite t statistic; they are flagged degenerate and reported with
    p -> 0. The zero-variance check uses a relative tolerance so a constant
    shift is caught even when float subtraction leaves 1-ulp noise in the
    differences.
    """
    if len(a) != len(b):
        raise ValidationError(f"paired samples differ in length: {len(a)} vs {len(b)}")
    n = len(a)
    if n < 2:
        raise ValidationError(f"paired t-test needs n >= 2, got {n}")
    diffs = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    mean = float(diffs.mean())
    sd = float(diffs.std(ddof=1))
    if sd == 0.0 or (mean != 0.0 and sd < abs(mean) * 1e-12):
        if mean == 0.0:
            return TTestResult(t_statistic=0.0, p_value=1.0)
        return TTestResult(t_statistic=math.inf if mean > 0 else -math.inf,
                           p_value=0.0, degenerate=True)
    t = mean / (sd / math.sqrt(n))
    p = 2.0 * float(stats.t.sf(abs(t), df=n - 1))
    return TTestResult(t_statistic=t, p_value=min(1.0, p))


def bonferroni(p_raw: float, n_comparisons: int) -> float:
    if n_comparisons < 1:
        raise ValidationError(f"n_comparisons must be >= 1, got {n_comparisons}")
    if not (0.0 <= p_raw <= 1.0):
        raise ValidationError(f"p value {p_raw!r} outside [0, 1]")
    return min(1.0, p_raw * n_comparisons)


@dataclass(frozen=True)
class SignificanceResult:
    system_a: str
    system_b: str
    metric: str
    t_statistic: float
    p_raw: float
    p_corrected: float
    n_comparisons: int
    significant_at_05: bool
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "system_a": self.system_a, "system_b": self.system_b,
            "metric": self.metric, "t_statistic": self.t_statistic,
            "p_raw": self.p_raw, "p_corrected": self.p_corrected,
            "n_comparisons": self.n_comparisons,
            "significant_at_0.05": self.significant_at_05,
            "degenerate": self.degenerate,
        }


def compare_reports(reports: Sequence[EvalReport],
                    metrics: Sequence[str] = ("ndcg10",),
                    alpha: float = 0.05) -> list[SignificanceResult]:
    """All pairwise paired t-tests, Bonferroni-corrected.

    n_comparisons = (number of system pairs) * (number of metrics) so the
    correction is auditable from the output. Topics are aligned by id; every
    report must cover the same evaluated topic set.
    """
    if len(reports) < 2:
        raise ValidationError("need at least two runs to compare")
    for metric in metrics:
        if metric not in METRIC_NAMES:
            raise ValidationError(f"unknown metric {metric!r}")
    topic_ids = [t.topic_id for t in reports[0].topics]
    for report in reports[1:]:
        if [t.topic_id for t in report.topics] != topic_ids:
            raise ValidationError(
                f"run {report.run_tag!r} evaluated a different topic set")
    pairs = [(i, j) for i in range(len(reports)) for j in range(i + 1, len(reports))]
    n_comparisons = len(pairs) * len(metrics)
    results = []
    for i, j in pairs:
        for metric in metrics:
            a = [t.value(metric) for t in reports[i].topics]
            b = [t.value(metric) for t in reports[j].topics]
            test = paired_ttest(a, b)
            corrected = bonferroni(test.p_value, n_comparisons)
            results.append(SignificanceResult(
                system_a=reports[i].run_tag, system_b=reports[j].run_tag,
                metric=metric, t_statistic=test.t_statistic,
                p_raw=test.p_value, p_corrected=corrected,
                n_comparisons=n_comparisons,
                significant_at_05=corrected < alpha,
                degenerate=test.degenerate,
            ))
    return results
