"""Credibility scoring: rank-weighted cosine similarity against evidence.

The score for a (document, topic) pair is a linear combination of the cosine
similarities between the document embedding and the embeddings of the top-k
evidence articles retrieved for the same topic. Weights are non-negative,
non-increasing with rank, and sum to one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Topic
from .errors import ParseError, ValidationError
from .index import InvertedIndex, retrieve

WEIGHT_TOLERANCE = 1e-9

SCHEDULES = ("linear_decay", "uniform", "custom")


def make_weights(k: int, schedule: str = "linear_decay",
                 custom: Sequence[float] | None = None) -> list[float]:
    """Weight vector for k evidence articles.

    linear_decay gives w_i = (k - i + 1) / (1 + 2 + ... + k); uniform gives
    1/k each. Custom weights are validated against the same invariants
    (sum to 1 within 1e-9, non-negative, non-increasing).
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if schedule == "linear_decay":
        total = k * (k + 1) / 2
        weights = [(k - i) / total for i in range(k)]
    elif schedule == "uniform":
        weights = [1.0 / k] * k
    elif schedule == "custom":
        if custom is None or len(custom) != k:
            raise ValidationError("custom schedule requires exactly k weights")
        weights = [float(w) for w in custom]
    else:
        raise ValidationError(f"unknown weight schedule {schedule!r}")
    validate_weights(weights)
    return weights


def validate_weights(weights: Sequence[float]) -> None:
    if not weights:
        raise ValidationError("weight vector is empty")
    if any(w < 0 for w in weights):
        raise ValidationError(f"weights must be non-negative: {list(weights)}")
    if abs(sum(weights) - 1.0) > WEIGHT_TOLERANCE:
        raise ValidationError(f"weights must sum to 1, got {sum(weights)!r}")
    for a, b in zip(weights, weights[1:]):
        if b > a:
            raise ValidationError(f"weights must be non-increasing: {list(weights)}")


def renormalize_weights(weights: Sequence[float], m: int) -> list[float]:
    """First m weights rescaled to sum to 1, for topics with fewer than k hits."""
    if m < 1 or m > len(weights):
        raise ValidationError(f"cannot keep {m} of {len(weights)} weights")
    head = list(weights[:m])
    total = sum(head)
    return [w / total for w in head]


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    """Cosine similarity, clamped to [-1, 1] against float rounding."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.ndim != 1 or vb.ndim != 1 or va.shape != vb.shape:
        raise ValidationError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    if not (np.isfinite(va).all() and np.isfinite(vb).all()):
        raise ValidationError("embedding contains non-finite values")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise ValidationError("cosine undefined for a zero vector")
    value = float(np.dot(va, vb) / (na * nb))
    return max(-1.0, min(1.0, value))


def retrieve_evidence(evidence_index: InvertedIndex, topic: Topic, k: int) -> list[str]:
    """Ids of the top-k evidence articles for the topic (BM25, shared tie rules).

    May return fewer than k when fewer articles match; the caller renormalizes
    the leading weights. An empty list means credibility is undefined for the
    topic and score_credibility applies its fallback.
    """
    ranked = retrieve(evidence_index, topic, n=k)
    return ranked.doc_ids()


def score_credibility(doc_emb: Sequence[float],
                      evidence_embs: Sequence[Sequence[float]],
                      weights: Sequence[float]) -> float:
    """Weighted sum of cosines between the document and the ranked evidence."""
    if len(evidence_embs) != len(weights):
        raise ValidationError(
            f"{len(evidence_embs)} evidence embeddings but {len(weights)} weights")
    validate_weights(weights)
    return sum(w * cosine(doc_emb, emb) for w, emb in zip(weights, evidence_embs))


@dataclass(frozen=True)
class CredibilityScore:
    topic_id: str
    doc_id: str
    value: float
    evidence_ids: tuple[str, ...]
    no_evidence: bool = False


NO_EVIDENCE_SCORE = 0.0


def score_topic_documents(topic: Topic, doc_embs: dict[str, Sequence[float]],
                          evidence_index: InvertedIndex,
                          evidence_embed, k: int = 3,
                          schedule: str = "linear_decay",
                          custom_weights: Sequence[float] | None = None) -> list[CredibilityScore]:
    """Credibility scores for every document of one topic.

    evidence_embed maps an article id to its embedding (callable); evidence is
    retrieved once per topic and the weights are renormalized when fewer than
    k articles match. Topics with no matching evidence fall back to a flagged
    score of 0.0 so the pipeline stays total.
    """
    weights = make_weights(k, schedule, custom_weights)
    evidence_ids = retrieve_evidence(evidence_index, topic, k)
    out: list[CredibilityScore] = []
    if not evidence_ids:
        for doc_id in doc_embs:
            out.append(CredibilityScore(topic.topic_id, doc_id, NO_EVIDENCE_SCORE,
                                        (), no_evidence=True))
        return out
    if len(evidence_ids) < k:
        weights = renormalize_weights(weights, len(evidence_ids))
    evidence_vecs = [evidence_embed(article_id) for article_id in evidence_ids]
    for doc_id, emb in doc_embs.items():
        value = score_credibility(emb, evidence_vecs, weights)
        out.append(CredibilityScore(topic.topic_id, doc_id, value, tuple(evidence_ids)))
    return out


def write_scores(scores: Sequence[CredibilityScore], path: str | Path) -> None:
    """Persist scores as JSONL records with the documented field names."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in scores:
            fh.write(json.dumps({
                "topic_id": s.topic_id,
                "doc_id": s.doc_id,
                "cred": s.value,
                "evidence_ids": list(s.evidence_ids),
                "no_evidence_flag": s.no_evidence,
            }) + "\n")


def load_scores(path: str | Path) -> dict[str, dict[str, CredibilityScore]]:
    """Load score records grouped as topic_id -> doc_id -> score."""
    grouped: dict[str, dict[str, CredibilityScore]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                score = CredibilityScore(
                    topic_id=record["topic_id"],
                    doc_id=record["doc_id"],
                    value=float(record["cred"]),
                    evidence_ids=tuple(record["evidence_ids"]),
                    no_evidence=bool(record.get("no_evidence_flag", False)),
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad credibility record: {exc}", path=str(path),
                                 line_number=lineno, field=None) from exc
            grouped.setdefault(score.topic_id, {})[score.doc_id] = score
    return grouped
