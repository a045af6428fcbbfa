"""Cross-encoder input construction and re-ranking orchestration.

Six input layouts are supported. The boundary carries ordered text segments;
only the scorer knows its tokenizer's special tokens, so it performs the join:

    plain_ce     [query, doc]
    bm25cat      [query, bm25, doc]
    credcat      [query, cred, doc]
    bm25credcat  [query, bm25, cred, doc]
    rel_score    [query, score-prefixed doc]
    rel_stat     [query, statement-prefixed doc]

Scores injected as their own segment (the *cat variants) use the same
formatted representations as statements. The bm25 value is always the
min-max normalized first-stage score; the credibility value is the raw
weighted-cosine output unless normalization is requested.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Document, Topic
from .credibility import CredibilityScore
from .enhancement import (TEMPLATE_PLACEHOLDERS, Provenance, ScoreRepresentation,
                          enhance, format_score, render_statement)
from .errors import ValidationError
from .index import RankedList, minmax_normalize
from .scorer import ScorerClient, ScorerHandle, ScorerInput

VARIANTS = ("plain_ce", "bm25cat", "credcat", "bm25credcat", "rel_score", "rel_stat")

# score strings each variant consumes as standalone segments
_VARIANT_SEGMENT_SCORES: dict[str, frozenset[str]] = {
    "plain_ce": frozenset(),
    "bm25cat": frozenset({"bm25"}),
    "credcat": frozenset({"cred"}),
    "bm25credcat": frozenset({"bm25", "cred"}),
    "rel_score": frozenset(),
    "rel_stat": frozenset(),
}


def build_input(variant: str, query: Topic, doc_or_enhanced: str,
                bm25_str: str | None = None,
                cred_str: str | None = None) -> ScorerInput:
    """Segment sequence for one (query, document) pair under a variant.

    For rel_score and rel_stat the text must already be enhanced; supplying a
    score string a variant does not consume (or omitting one it does) is an
    error.
    """
    if variant not in _VARIANT_SEGMENT_SCORES:
        raise ValidationError(f"unknown input variant {variant!r}")
    needed = _VARIANT_SEGMENT_SCORES[variant]
    supplied = {name for name, value in (("bm25", bm25_str), ("cred", cred_str))
                if value is not None}
    if supplied != needed:
        raise ValidationError(
            f"variant {variant!r} takes score strings {sorted(needed)}, "
            f"got {sorted(supplied)}")
    if variant == "bm25cat":
        segments = (query.text, bm25_str, doc_or_enhanced)
    elif variant == "credcat":
        segments = (query.text, cred_str, doc_or_enhanced)
    elif variant == "bm25credcat":
        segments = (query.text, bm25_str, cred_str, doc_or_enhanced)
    else:  # plain_ce, rel_score, rel_stat: two segments
        segments = (query.text, doc_or_enhanced)
    return ScorerInput(segments=segments)


@dataclass(frozen=True)
class RerankRunConfig:
    """Parameters of one re-ranking run."""

    variant: str = "plain_ce"
    representation: ScoreRepresentation = ScoreRepresentation("decimal", places=4)
    template: str | None = None
    first_stage_n: int = 500
    tag: str = "rerank"
    normalize_cred: bool = False  # min-max credibility per topic before formatting

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown variant {self.variant!r}")
        if self.variant == "rel_stat":
            if self.template is None:
                raise ValidationError("variant rel_stat requires a statement template")
            if self.template not in TEMPLATE_PLACEHOLDERS or self.template == "score_only":
                raise ValidationError(f"invalid template {self.template!r} for rel_stat")
        if self.first_stage_n < 1:
            raise ValidationError(f"first_stage_n must be >= 1, got {self.first_stage_n}")

    def effective_template(self) -> str | None:
        return "score_only" if self.variant == "rel_score" else self.template

    def needs_credibility(self) -> bool:
        if self.variant in ("credcat", "bm25credcat", "rel_score"):
            return True
        if self.variant == "rel_stat":
            return "X" in TEMPLATE_PLACEHOLDERS[self.template]
        return False

    def needs_topicality(self) -> bool:
        if self.variant in ("bm25cat", "bm25credcat"):
            return True
        if self.variant == "rel_stat":
            return "Y" in TEMPLATE_PLACEHOLDERS[self.template]
        return False


def _statement_for(config: RerankRunConfig, cred_str: str | None,
                   top_str: str | None) -> str:
    template = config.effective_template()
    placeholders = TEMPLATE_PLACEHOLDERS[template]
    kwargs = {}
    if "X" in placeholders:
        kwargs["cred_str"] = cred_str
    if "Y" in placeholders:
        kwargs["top_str"] = top_str
    return render_statement(template, **kwargs)


def build_topic_inputs(config: RerankRunConfig, topic: Topic,
                       first_stage: RankedList, corpus: dict[str, Document],
                       cred_scores: dict[str, CredibilityScore] | None,
                       ) -> tuple[list[str], list[ScorerInput]]:
    """Scorer inputs for every first-stage candidate of one topic.

    Returns (doc_ids, inputs), aligned. Topicality strings come from the
    min-max normalized first-stage scores; credibility strings from the
    per-topic credibility records (raising when a needed record is missing).
    """
    if len(first_stage.items) > config.first_stage_n:
        raise ValidationError(
            f"first-stage list for topic {topic.topic_id!r} has "
            f"{len(first_stage.items)} items, beyond first_stage_n={config.first_stage_n}")
    normalized = minmax_normalize(first_stage) if first_stage.items else first_stage
    top_values = {doc_id: score for doc_id, score in normalized.items}

    cred_values: dict[str, float] = {}
    if config.needs_credibility():
        if cred_scores is None:
            raise ValidationError(f"variant {config.variant!r} requires credibility scores")
        for doc_id, _ in first_stage.items:
            if doc_id not in cred_scores:
                raise ValidationError(
                    f"missing credibility score for topic {topic.topic_id!r}, doc {doc_id!r}")
            cred_values[doc_id] = cred_scores[doc_id].value
        if config.normalize_cred and cred_values:
            lo, hi = min(cred_values.values()), max(cred_values.values())
            cred_values = {d: 1.0 if hi == lo else (v - lo) / (hi - lo)
                           for d, v in cred_values.items()}

    doc_ids: list[str] = []
    inputs: list[ScorerInput] = []
    for doc_id, _ in first_stage.items:
        if doc_id not in corpus:
            raise ValidationError(f"doc {doc_id!r} from first stage missing in corpus")
        doc = corpus[doc_id]
        bm25_str = (format_score(top_values[doc_id], config.representation)
                    if config.needs_topicality() else None)
        cred_str = (format_score(cred_values[doc_id], config.representation)
                    if config.needs_credibility() else None)
        if config.variant in ("rel_score", "rel_stat"):
            statement = _statement_for(config, cred_str, bm25_str)
            raw: dict[str, float] = {}
            if cred_str is not None:
                raw["credibility"] = cred_values[doc_id]
            if bm25_str is not None:
                raw["topicality"] = top_values[doc_id]
            enhanced = enhance(doc, statement, Provenance(
                representation=config.representation.label(),
                template_id=config.effective_template(),
                raw_scores=raw))
            inputs.append(build_input(config.variant, topic, enhanced.enhanced_text))
        else:
            inputs.append(build_input(config.variant, topic, doc.text,
                                      bm25_str=bm25_str, cred_str=cred_str))
        doc_ids.append(doc_id)
    return doc_ids, inputs


def rerank_topic(config: RerankRunConfig, topic: Topic, first_stage: RankedList,
                 corpus: dict[str, Document],
                 cred_scores: dict[str, CredibilityScore] | None,
                 handle: ScorerHandle) -> RankedList:
    """Re-score every first-stage candidate and sort by scorer output.

    The output is a permutation of the input document set: same length, ties
    broken by doc_id ascending. Permuting the first-stage list does not change
    the result.
    """
    if not first_stage.items:
        return RankedList(topic_id=topic.topic_id, items=())
    doc_ids, inputs = build_topic_inputs(config, topic, first_stage, corpus, cred_scores)
    scores = ScorerClient(handle).score_batch(inputs)
    for doc_id, score in zip(doc_ids, scores):
        if not (0.0 <= score <= 1.0):
            raise ValidationError(
                f"scorer returned {score!r} outside [0, 1] for doc {doc_id!r}")
    reranked = sorted(zip(doc_ids, scores), key=lambda pair: (-pair[1], pair[0]))
    return RankedList(topic_id=topic.topic_id, items=tuple(reranked))
