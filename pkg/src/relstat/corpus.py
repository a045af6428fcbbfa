"""Readers and writers for the external data artifacts.

Formats:
    corpus    JSONL, one object per line with "doc_id" and "text" (optional "title")
    topics    JSONL, one object per line with "topic_id" and "text"
    evidence  JSONL, one object per line with "article_id" and "text"
    qrels     whitespace separated ``topic_id 0 doc_id label``
    runs      TREC exchange format ``topic_id Q0 doc_id rank score tag``

All loaders are pure readers; loaded values are immutable and safe to share
across threads. Parse failures raise ParseError with the line number and the
offending field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str
    title: str | None = None


@dataclass(frozen=True)
class Topic:
    topic_id: str
    text: str


@dataclass(frozen=True)
class QrelEntry:
    topic_id: str
    doc_id: str
    label: int


@dataclass(frozen=True)
class RunEntry:
    topic_id: str
    doc_id: str
    rank: int
    score: float
    tag: str


@dataclass(frozen=True)
class EvidenceArticle:
    article_id: str
    text: str


def _jsonl_records(path: str | Path) -> Iterable[tuple[int, dict]]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", path=str(path),
                                 line_number=lineno, field=None) from exc
            if not isinstance(record, dict):
                raise ParseError("record is not a JSON object", path=str(path),
                                 line_number=lineno, field=None)
            yield lineno, record


def _require_str(record: dict, field: str, path: str | Path, lineno: int) -> str:
    value = record.get(field)
    if not isinstance(value, str) or not value.strip():
        raise ParseError(f"missing or empty {field!r}", path=str(path),
                         line_number=lineno, field=field)
    return value


def load_corpus(path: str | Path, id_field: str = "doc_id") -> list[Document]:
    """Load a JSONL corpus, preserving file order and rejecting duplicate ids."""
    docs: list[Document] = []
    seen: set[str] = set()
    for lineno, record in _jsonl_records(path):
        doc_id = _require_str(record, id_field, path, lineno)
        text = _require_str(record, "text", path, lineno)
        if doc_id in seen:
            raise ValidationError(f"duplicate doc_id {doc_id!r} at line {lineno} of {path}")
        seen.add(doc_id)
        docs.append(Document(doc_id=doc_id, text=text, title=record.get("title")))
    return docs


def load_topics(path: str | Path) -> list[Topic]:
    topics: list[Topic] = []
    seen: set[str] = set()
    for lineno, record in _jsonl_records(path):
        topic_id = _require_str(record, "topic_id", path, lineno)
        text = _require_str(record, "text", path, lineno)
        if topic_id in seen:
            raise ValidationError(f"duplicate topic_id {topic_id!r} at line {lineno} of {path}")
        seen.add(topic_id)
        topics.append(Topic(topic_id=topic_id, text=text))
    return topics


def load_evidence(path: str | Path) -> list[EvidenceArticle]:
    docs = load_corpus(path, id_field="article_id")
    return [EvidenceArticle(article_id=d.doc_id, text=d.text) for d in docs]


def load_qrels(path: str | Path, permissive: bool = False) -> list[QrelEntry]:
    """Parse TREC qrels.

    Labels must be 0 or 1. With ``permissive=True`` graded labels are clamped
    to the binary scale (>=1 becomes 1, <=0 becomes 0) instead of rejected.
    """
    entries: list[QrelEntry] = []
    seen: set[tuple[str, str]] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ParseError(f"expected 4 fields, got {len(parts)}",
                                 path=str(path), line_number=lineno, field=None)
            topic_id, _iteration, doc_id, label_str = parts
            try:
                label = int(label_str)
            except ValueError as exc:
                raise ParseError(f"non-integer label {label_str!r}", path=str(path),
                                 line_number=lineno, field="label") from exc
            if label not in (0, 1):
                if not permissive:
                    raise ParseError(f"label {label} outside {{0, 1}}", path=str(path),
                                     line_number=lineno, field="label")
                label = 1 if label >= 1 else 0
            key = (topic_id, doc_id)
            if key in seen:
                raise ValidationError(
                    f"duplicate qrel for topic {topic_id!r}, doc {doc_id!r} "
                    f"at line {lineno} of {path}")
            seen.add(key)
            entries.append(QrelEntry(topic_id=topic_id, doc_id=doc_id, label=label))
    return entries


def validate_run(entries: Sequence[RunEntry], check_tie_order: bool = True) -> None:
    """Check the run-file invariants; raise ValidationError on the first breach.

    Per topic: ranks form 1..n with no gaps, doc_ids are unique, and scores are
    non-increasing with rank (equal scores must be ordered by doc_id ascending).
    Parsed files skip the tie-order check: printing at 6 decimals can collapse
    scores the producer legitimately ordered by their unquantized values.
    """
    by_topic: dict[str, list[RunEntry]] = {}
    for e in entries:
        if e.rank < 1:
            raise ValidationError(f"rank must be positive, got {e.rank} for {e.doc_id!r}")
        if not math.isfinite(e.score):
            raise ValidationError(f"non-finite score for topic {e.topic_id!r}, doc {e.doc_id!r}")
        by_topic.setdefault(e.topic_id, []).append(e)
    for topic_id, group in by_topic.items():
        group = sorted(group, key=lambda e: e.rank)
        ranks = [e.rank for e in group]
        if ranks != list(range(1, len(group) + 1)):
            raise ValidationError(f"ranks for topic {topic_id!r} are not 1..n without gaps: {ranks}")
        doc_ids = [e.doc_id for e in group]
        if len(set(doc_ids)) != len(doc_ids):
            raise ValidationError(f"duplicate doc_id within topic {topic_id!r}")
        for prev, cur in zip(group, group[1:]):
            if cur.score > prev.score:
                raise ValidationError(
                    f"scores increase with rank in topic {topic_id!r} "
                    f"({prev.doc_id!r}={prev.score} before {cur.doc_id!r}={cur.score})")
            if check_tie_order and cur.score == prev.score and cur.doc_id < prev.doc_id:
                raise ValidationError(
                    f"tie in topic {topic_id!r} not broken by doc_id ascending "
                    f"({prev.doc_id!r} before {cur.doc_id!r})")


def write_run(entries: Sequence[RunEntry], path: str | Path) -> None:
    """Write a TREC run file; validates all entries before writing anything."""
    validate_run(entries)
    with open(path, "w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(f"{e.topic_id} Q0 {e.doc_id} {e.rank} {e.score:.6f} {e.tag}\n")


def read_run(path: str | Path) -> list[RunEntry]:
    entries: list[RunEntry] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6:
                raise ParseError(f"expected 6 fields, got {len(parts)}",
                                 path=str(path), line_number=lineno, field=None)
            topic_id, _q0, doc_id, rank_str, score_str, tag = parts
            try:
                rank = int(rank_str)
            except ValueError as exc:
                raise ParseError(f"non-integer rank {rank_str!r}", path=str(path),
                                 line_number=lineno, field="rank") from exc
            try:
                score = float(score_str)
            except ValueError as exc:
                raise ParseError(f"non-numeric score {score_str!r}", path=str(path),
                                 line_number=lineno, field="score") from exc
            entries.append(RunEntry(topic_id=topic_id, doc_id=doc_id, rank=rank,
                                    score=score, tag=tag))
    validate_run(entries, check_tie_order=False)
    return entries
