"""Inverted index and first-stage BM25 retrieval.

The index is immutable once built: retrieval and scoring are read-only and
safe for concurrent callers, and per-topic retrieval can be parallelized
freely. BM25 uses the Robertson idf with +1 smoothing,

    idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))

which keeps every score non-negative. Ties are broken by doc_id ascending
everywhere so runs are reproducible across platforms.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import Document, RunEntry, Topic
from .errors import ValidationError
from .tokenization import Tokenizer

_MAGIC = b"RSIX"
_VERSION = 1


@dataclass(frozen=True)
class RankedList:
    topic_id: str
    items: tuple[tuple[str, float], ...]  # (doc_id, score), scores non-increasing

    def doc_ids(self) -> list[str]:
        return [doc_id for doc_id, _ in self.items]


class InvertedIndex:
    """Term postings plus the corpus statistics BM25 needs.

    postings maps term -> list of (doc_ordinal, term_frequency) sorted by
    ordinal; doc_table maps ordinal -> doc_id.
    """

    def __init__(self, postings: dict[str, list[tuple[int, int]]],
                 doc_table: list[str], doc_lengths: list[int],
                 tokenizer: Tokenizer):
        if len(doc_table) != len(doc_lengths):
            raise ValidationError("doc_table and doc_lengths length mismatch")
        self.postings = postings
        self.doc_table = list(doc_table)
        self.doc_lengths = list(doc_lengths)
        self.tokenizer = tokenizer
        self.doc_count = len(doc_table)
        self.avg_doc_length = (sum(doc_lengths) / len(doc_lengths)) if doc_lengths else 0.0
        self._ordinal_of = {doc_id: i for i, doc_id in enumerate(doc_table)}

    def ordinal(self, doc_id: str) -> int:
        return self._ordinal_of[doc_id]

    def __eq__(self, other):
        return (isinstance(other, InvertedIndex)
                and self.postings == other.postings
                and self.doc_table == other.doc_table
                and self.doc_lengths == other.doc_lengths
                and self.tokenizer == other.tokenizer)


def build_index(corpus: Sequence[Document], tokenizer: Tokenizer | None = None) -> InvertedIndex:
    """Index a corpus; single-writer, the result is immutable."""
    if not corpus:
        raise ValidationError("cannot index an empty corpus")
    tokenizer = tokenizer or Tokenizer()
    seen: set[str] = set()
    postings: dict[str, list[tuple[int, int]]] = {}
    doc_table: list[str] = []
    doc_lengths: list[int] = []
    for ordinal, doc in enumerate(corpus):
        if doc.doc_id in seen:
            raise ValidationError(f"duplicate doc_id {doc.doc_id!r} in corpus")
        seen.add(doc.doc_id)
        tokens = tokenizer.tokenize(doc.text)
        doc_table.append(doc.doc_id)
        doc_lengths.append(len(tokens))
        counts: dict[str, int] = {}
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
        for term, tf in counts.items():
            postings.setdefault(term, []).append((ordinal, tf))
    # lists are built in ordinal order already; keep the invariant explicit
    for plist in postings.values():
        plist.sort(key=lambda pair: pair[0])
    return InvertedIndex(postings, doc_table, doc_lengths, tokenizer)


def bm25_score(index: InvertedIndex, query_tokens: Sequence[str],
               doc_ordinal: int, k1: float = 1.2, b: float = 0.75) -> float:
    """BM25 score of one document for a tokenized query.

    Repeated query terms contribute once (the sum runs over the distinct
    terms of the query). Zero when no query term occurs in the document.
    """
    if not (k1 > 0):
        raise ValidationError(f"k1 must be > 0, got {k1}")
    if not (0.0 <= b <= 1.0):
        raise ValidationError(f"b must be in [0, 1], got {b}")
    if not (0 <= doc_ordinal < index.doc_count):
        raise ValidationError(f"unknown doc ordinal {doc_ordinal}")
    n = index.doc_count
    dl = index.doc_lengths[doc_ordinal]
    norm = k1 * (1.0 - b + b * dl / index.avg_doc_length)
    score = 0.0
    # sorted term order fixes the float summation order, so scores are
    # reproducible across processes regardless of hash randomization
    for term in sorted(set(query_tokens)):
        plist = index.postings.get(term)
        if plist is None:
            continue
        tf = 0
        for ordinal, freq in plist:
            if ordinal == doc_ordinal:
                tf = freq
                break
        if tf == 0:
            continue
        df = len(plist)
        idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
        score += idf * tf * (k1 + 1.0) / (tf + norm)
    return score


def retrieve(index: InvertedIndex, topic: Topic, n: int = 500,
             k1: float = 1.2, b: float = 0.75) -> RankedList:
    """Top-n BM25 candidates for a topic, ties broken by doc_id ascending.

    Only documents sharing at least one term with the query are candidates,
    so fewer than n items come back when fewer match.
    """
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    # sorted, like bm25_score, so the accumulation order (and therefore the
    # exact float result) matches per-document scoring
    query_terms = sorted(set(index.tokenizer.tokenize(topic.text)))
    scores: dict[int, float] = {}
    for term in query_terms:
        plist = index.postings.get(term)
        if plist is None:
            continue
        df = len(plist)
        idf = math.log(1.0 + (index.doc_count - df + 0.5) / (df + 0.5))
        for ordinal, tf in plist:
            dl = index.doc_lengths[ordinal]
            norm = k1 * (1.0 - b + b * dl / index.avg_doc_length)
            scores[ordinal] = scores.get(ordinal, 0.0) + idf * tf * (k1 + 1.0) / (tf + norm)
    ranked = sorted(scores.items(),
                    key=lambda item: (-item[1], index.doc_table[item[0]]))
    items = tuple((index.doc_table[ordinal], score) for ordinal, score in ranked[:n])
    return RankedList(topic_id=topic.topic_id, items=items)


def minmax_normalize(ranked: RankedList) -> RankedList:
    """Map scores to [0, 1] within the topic; a constant list maps to all 1.0."""
    if not ranked.items:
        raise ValidationError(f"cannot normalize empty ranked list for topic {ranked.topic_id!r}")
    scores = [s for _, s in ranked.items]
    lo, hi = min(scores), max(scores)
    if hi == lo:
        items = tuple((doc_id, 1.0) for doc_id, _ in ranked.items)
    else:
        items = tuple((doc_id, (s - lo) / (hi - lo)) for doc_id, s in ranked.items)
    return RankedList(topic_id=ranked.topic_id, items=items)


def ranked_lists_to_run(lists: Sequence[RankedList], tag: str) -> list[RunEntry]:
    """Flatten per-topic ranked lists into TREC run entries, ranks 1..n."""
    entries: list[RunEntry] = []
    for ranked in lists:
        for rank, (doc_id, score) in enumerate(ranked.items, start=1):
            entries.append(RunEntry(topic_id=ranked.topic_id, doc_id=doc_id,
                                    rank=rank, score=score, tag=tag))
    return entries


def run_to_ranked_lists(entries: Sequence[RunEntry]) -> dict[str, RankedList]:
    """Group run entries back into per-topic ranked lists (rank order)."""
    by_topic: dict[str, list[RunEntry]] = {}
    for e in entries:
        by_topic.setdefault(e.topic_id, []).append(e)
    out: dict[str, RankedList] = {}
    for topic_id, group in by_topic.items():
        group.sort(key=lambda e: e.rank)
        out[topic_id] = RankedList(topic_id=topic_id,
                                   items=tuple((e.doc_id, e.score) for e in group))
    return out


# Serialized layout (little-endian), version 1:
#   magic "RSIX", u16 version
#   u8 lowercase, u8 stemmer (0 none, 1 porter)
#   u32 stopword count, then per stopword: u32 byte length + utf-8 bytes
#   u32 doc count, then per doc: u32 id length + utf-8 id, u32 token length
#   u32 term count, then per term (sorted ascending):
#       u32 term length + utf-8 term, u32 df, df * (u32 ordinal, u32 tf)

def _write_str(out, s: str) -> None:
    raw = s.encode("utf-8")
    out.write(struct.pack("<I", len(raw)))
    out.write(raw)


def _read_str(buf: memoryview, pos: int) -> tuple[str, int]:
    (length,) = struct.unpack_from("<I", buf, pos)
    pos += 4
    s = bytes(buf[pos:pos + length]).decode("utf-8")
    return s, pos + length


def save_index(index: InvertedIndex, path: str | Path) -> None:
    with open(path, "wb") as out:
        out.write(_MAGIC)
        out.write(struct.pack("<H", _VERSION))
        out.write(struct.pack("<BB", int(index.tokenizer.lowercase),
                              1 if index.tokenizer.stemmer == "porter" else 0))
        stopwords = sorted(index.tokenizer.stopwords)
        out.write(struct.pack("<I", len(stopwords)))
        for word in stopwords:
            _write_str(out, word)
        out.write(struct.pack("<I", index.doc_count))
        for doc_id, length in zip(index.doc_table, index.doc_lengths):
            _write_str(out, doc_id)
            out.write(struct.pack("<I", length))
        out.write(struct.pack("<I", len(index.postings)))
        for term in sorted(index.postings):
            _write_str(out, term)
            plist = index.postings[term]
            out.write(struct.pack("<I", len(plist)))
            for ordinal, tf in plist:
                out.write(struct.pack("<II", ordinal, tf))


def load_index(path: str | Path) -> InvertedIndex:
    with open(path, "rb") as fh:
        data = fh.read()
    buf = memoryview(data)
    if bytes(buf[:4]) != _MAGIC:
        raise ValidationError(f"{path}: not an index file (bad magic)")
    (version,) = struct.unpack_from("<H", buf, 4)
    if version != _VERSION:
        raise ValidationError(f"{path}: unsupported index version {version}")
    pos = 6
    lowercase, stemmer_code = struct.unpack_from("<BB", buf, pos)
    pos += 2
    (n_stop,) = struct.unpack_from("<I", buf, pos)
    pos += 4
    stopwords = []
    for _ in range(n_stop):
        word, pos = _read_str(buf, pos)
        stopwords.append(word)
    tokenizer = Tokenizer(lowercase=bool(lowercase),
                          stopwords=frozenset(stopwords),
                          stemmer="porter" if stemmer_code == 1 else "none")
    (n_docs,) = struct.unpack_from("<I", buf, pos)
    pos += 4
    doc_table: list[str] = []
    doc_lengths: list[int] = []
    for _ in range(n_docs):
        doc_id, pos = _read_str(buf, pos)
        (length,) = struct.unpack_from("<I", buf, pos)
        pos += 4
        doc_table.append(doc_id)
        doc_lengths.append(length)
    (n_terms,) = struct.unpack_from("<I", buf, pos)
    pos += 4
    postings: dict[str, list[tuple[int, int]]] = {}
    for _ in range(n_terms):
        term, pos = _read_str(buf, pos)
        (df,) = struct.unpack_from("<I", buf, pos)
        pos += 4
        plist = []
        for _ in range(df):
            ordinal, tf = struct.unpack_from("<II", buf, pos)
            pos += 8
            if ordinal >= n_docs:
                raise ValidationError(f"{path}: posting references unknown ordinal {ordinal}")
            plist.append((ordinal, tf))
        postings[term] = plist
    return InvertedIndex(postings, doc_table, doc_lengths, tokenizer)
