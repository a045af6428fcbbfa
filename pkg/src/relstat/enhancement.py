"""Score formatting, statement templates, and document enhancement.

A relevance statement is rendered from a template plus formatted score
strings and prepended to the document body. The statement is a strict prefix
so it survives downstream truncation, and the original text is recoverable by
stripping the recorded statement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Mapping

from .corpus import Document
from .errors import ValidationError

INTEGER_MULTIPLIERS = (100, 1000)

TEMPLATE_IDS = ("c1", "c2", "t1", "t2", "tc", "score_only")

# which placeholders each template consumes: X = credibility, Y = topicality
TEMPLATE_PLACEHOLDERS: dict[str, frozenset[str]] = {
    "c1": frozenset("X"),
    "c2": frozenset("X"),
    "t1": frozenset("Y"),
    "t2": frozenset("Y"),
    "tc": frozenset("XY"),
    "score_only": frozenset("X"),
}


@dataclass(frozen=True)
class ScoreRepresentation:
    """How a relevance score is rendered into tokens.

    kind "decimal" uses ``places`` fractional digits (1..4), kind "integer"
    multiplies by 100 or 1000 and rounds, kind "segmented" spaces out every
    character of the 4-decimal rendering.
    """

    kind: str
    places: int = 4
    multiplier: int = 1000

    def __post_init__(self):
        if self.kind not in ("decimal", "integer", "segmented"):
            raise ValidationError(f"unknown representation kind {self.kind!r}")
        if self.kind == "decimal" and not (1 <= self.places <= 4):
            raise ValidationError(f"decimal places must be in 1..4, got {self.places}")
        if self.kind == "integer" and self.multiplier not in INTEGER_MULTIPLIERS:
            raise ValidationError(
                f"integer multiplier must be one of {INTEGER_MULTIPLIERS}, got {self.multiplier}")

    @classmethod
    def parse(cls, spec: str) -> "ScoreRepresentation":
        """Parse CLI syntax: decimal:4, integer:100, integer:1000, segmented."""
        kind, _, arg = spec.partition(":")
        if kind == "decimal":
            return cls("decimal", places=int(arg or 4))
        if kind == "integer":
            return cls("integer", multiplier=int(arg or 1000))
        if kind == "segmented":
            if arg:
                raise ValidationError("segmented takes no argument")
            return cls("segmented")
        raise ValidationError(f"cannot parse representation {spec!r}")

    def label(self) -> str:
        if self.kind == "decimal":
            return f"decimal:{self.places}"
        if self.kind == "integer":
            return f"integer:{self.multiplier}"
        return "segmented"


def format_score(score: float, repr_: ScoreRepresentation) -> str:
    """Render a score deterministically, locale-independent, half-to-even.

    The integer kinds scale the exact binary value of the float before
    rounding (Decimal arithmetic) so the result never depends on a second
    float rounding of score * multiplier.
    """
    if not math.isfinite(score):
        raise ValidationError(f"cannot format non-finite score {score!r}")
    if repr_.kind == "decimal":
        return format(score, f".{repr_.places}f")
    if repr_.kind == "integer":
        scaled = (Decimal(score) * repr_.multiplier).to_integral_value(ROUND_HALF_EVEN)
        return str(int(scaled))
    # segmented: every character of the 4-decimal string, point included
    return " ".join(format(score, ".4f"))


def render_statement(template_id: str, cred_str: str | None = None,
                     top_str: str | None = None) -> str:
    """Instantiate a statement template with formatted score strings.

    Exactly the placeholders the template requires must be supplied; anything
    missing or superfluous is an error.
    """
    if template_id not in TEMPLATE_PLACEHOLDERS:
        raise ValidationError(f"unknown statement template {template_id!r}")
    needed = TEMPLATE_PLACEHOLDERS[template_id]
    supplied = {name for name, value in (("X", cred_str), ("Y", top_str))
                if value is not None}
    if supplied != needed:
        raise ValidationError(
            f"template {template_id!r} needs placeholders {sorted(needed)}, "
            f"got {sorted(supplied)}")
    if template_id == "c1":
        return f"Credibility score is {cred_str}"
    if template_id == "c2":
        return f"Credibility score of the document is {cred_str}"
    if template_id == "t1":
        return f"Topicality score is {top_str}"
    if template_id == "t2":
        return f"Topicality score of the document is {top_str}"
    if template_id == "tc":
        return (f"Credibility score of the document is {cred_str}. "
                f"Topicality score of the document is {top_str}")
    return cred_str  # score_only: the bare score string


@dataclass(frozen=True)
class Provenance:
    representation: str
    template_id: str
    raw_scores: Mapping[str, float]


@dataclass(frozen=True)
class EnhancedDocument:
    doc_id: str
    statement: str
    enhanced_text: str
    provenance: Provenance | None = None


def enhance(doc: Document, statement: str,
            provenance: Provenance | None = None) -> EnhancedDocument:
    """Prepend the statement to the document body (statement ++ " " ++ text)."""
    if not statement:
        raise ValidationError(f"empty statement for doc {doc.doc_id!r}")
    return EnhancedDocument(
        doc_id=doc.doc_id,
        statement=statement,
        enhanced_text=f"{statement} {doc.text}",
        provenance=provenance,
    )


def strip_statement(enhanced: EnhancedDocument) -> str:
    """Recover the original body from an enhanced document."""
    prefix = enhanced.statement + " "
    if not enhanced.enhanced_text.startswith(prefix):
        raise ValidationError(
            f"enhanced text for doc {enhanced.doc_id!r} does not start with its statement")
    return enhanced.enhanced_text[len(prefix):]
