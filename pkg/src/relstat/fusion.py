"""Weighted-average aggregation (WAM) of topicality and credibility.

The compensatory baseline: fused = w_t * topicality + w_c * credibility over
min-max normalized operands. A low score on one dimension can be bought back
by a high score on the other, which is exactly the behavior the statement
based re-ranker is meant to avoid.
"""

from __future__ import annotations

from dataclasses import dataclass

from .credibility import CredibilityScore
from .errors import ValidationError
from .index import RankedList


@dataclass(frozen=True)
class FusionConfig:
    w_topicality: float = 0.5
    w_credibility: float = 0.5

    def __post_init__(self):
        if not (0.0 <= self.w_topicality <= 1.0 and 0.0 <= self.w_credibility <= 1.0):
            raise ValidationError("fusion weights must lie in [0, 1]")
        if abs(self.w_topicality + self.w_credibility - 1.0) > 1e-9:
            raise ValidationError(
                f"fusion weights must sum to 1, got "
                f"{self.w_topicality} + {self.w_credibility}")


def wam(ranked: RankedList, cred_values: dict[str, float],
        config: FusionConfig = FusionConfig()) -> RankedList:
    """Fuse an already-normalized topicality list with credibility values.

    Every document needs a credibility value; both operands are expected in
    [0, 1] (normalize beforehand). Output re-sorted descending, ties by
    doc_id ascending.
    """
    fused = []
    for doc_id, topicality in ranked.items:
        if doc_id not in cred_values:
            raise ValidationError(
                f"missing credibility for topic {ranked.topic_id!r}, doc {doc_id!r}")
        score = config.w_topicality * topicality + config.w_credibility * cred_values[doc_id]
        fused.append((doc_id, score))
    fused.sort(key=lambda pair: (-pair[1], pair[0]))
    return RankedList(topic_id=ranked.topic_id, items=tuple(fused))


def normalize_cred_values(scores: dict[str, CredibilityScore]) -> dict[str, float]:
    """Min-max credibility within a topic so both fusion operands share [0, 1].

    Raw weighted cosines can be negative and would otherwise dominate the
    average. A constant set maps to all 1.0, mirroring the topicality rule.
    """
    if not scores:
        return {}
    values = [s.value for s in scores.values()]
    lo, hi = min(values), max(values)
    if hi == lo:
        return {doc_id: 1.0 for doc_id in scores}
    return {doc_id: (s.value - lo) / (hi - lo) for doc_id, s in scores.items()}
