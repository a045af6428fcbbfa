"""Model bundle: tokenizer, embedding encoder, and relevance-scoring head.

The bundle owns everything the wire protocol hides from clients: the special
classifier/separator tokens, the segment join, the 512-token truncation, and
the pooling strategy. Scoring inputs arrive as ordered text segments; the
input layout is

    [CLS] seg_1 [SEP] seg_2 [SEP] ... seg_n [SEP]

with token type 0 for the first segment (the query) and 1 for the rest.
Truncation drops tokens from the tail of the FINAL segment only, so any
statement prefix of the document segment survives.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from transformers import (BertForSequenceClassification, BertModel,
                          BertTokenizer)

MAX_SEQUENCE_TOKENS = 512

POOLING_MODES = ("mean", "cls")


class BundleError(Exception):
    pass


class InputTooLongError(BundleError):
    """Non-final segments already exceed the token budget."""


@dataclass
class EncodedInput:
    tokens: list[str]
    input_ids: list[int]
    token_type_ids: list[int]
    truncated: bool


class ModelBundle:
    """Inference-mode models plus the tokenizer that feeds them."""

    def __init__(self, model_path: str, pooling: str = "mean",
                 max_tokens: int = MAX_SEQUENCE_TOKENS):
        if pooling not in POOLING_MODES:
            raise BundleError(f"pooling must be one of {POOLING_MODES}, got {pooling!r}")
        self.model_path = model_path
        self.pooling = pooling
        self.max_tokens = max_tokens
        self.tokenizer = BertTokenizer.from_pretrained(model_path)
        self.encoder = BertModel.from_pretrained(model_path)
        self.encoder.eval()
        self.scorer = BertForSequenceClassification.from_pretrained(
            model_path, num_labels=1)
        self.scorer.eval()
        self.dim = int(self.encoder.config.hidden_size)

    # ------------------------------------------------------------------
    # encoding
    # ------------------------------------------------------------------

    def encode_segments(self, segments: list[str]) -> EncodedInput:
        """Tokenize segments into the cross-encoder layout, truncating the
        final segment's tail to honor the token budget."""
        if len(segments) < 2:
            raise BundleError("need at least 2 segments")
        pieces = [self.tokenizer.tokenize(seg) for seg in segments]
        overhead = 1 + len(segments)  # [CLS] plus one [SEP] per segment
        head_len = sum(len(p) for p in pieces[:-1])
        budget = self.max_tokens - overhead - head_len
        if budget < 1:
            raise InputTooLongError(
                f"non-final segments use {head_len} tokens, leaving no room "
                f"for the document within {self.max_tokens}")
        truncated = len(pieces[-1]) > budget
        final = pieces[-1][:budget]

        tokens = [self.tokenizer.cls_token]
        token_types = [0]
        for i, piece in enumerate(pieces[:-1] + [final]):
            tokens.extend(piece)
            tokens.append(self.tokenizer.sep_token)
            segment_type = 0 if i == 0 else 1
            token_types.extend([segment_type] * (len(piece) + 1))
        input_ids = self.tokenizer.convert_tokens_to_ids(tokens)
        return EncodedInput(tokens=tokens, input_ids=input_ids,
                            token_type_ids=token_types, truncated=truncated)

    def _pad_batch(self, encoded: list[EncodedInput]) -> dict[str, torch.Tensor]:
        width = max(len(e.input_ids) for e in encoded)
        pad_id = self.tokenizer.pad_token_id
        input_ids, token_types, mask = [], [], []
        for e in encoded:
            n = len(e.input_ids)
            input_ids.append(e.input_ids + [pad_id] * (width - n))
            token_types.append(e.token_type_ids + [0] * (width - n))
            mask.append([1] * n + [0] * (width - n))
        return {
            "input_ids": torch.tensor(input_ids, dtype=torch.long),
            "token_type_ids": torch.tensor(token_types, dtype=torch.long),
            "attention_mask": torch.tensor(mask, dtype=torch.long),
        }

    # ------------------------------------------------------------------
    # inference
    # ------------------------------------------------------------------

    @torch.no_grad()
    def score(self, items: list[list[str]]) -> list[float]:
        """Relevance scores in [0, 1]: logistic map over the single logit."""
        if not items:
            return []
        encoded = [self.encode_segments(segments) for segments in items]
        batch = self._pad_batch(encoded)
        logits = self.scorer(**batch).logits.squeeze(-1)
        return [float(v) for v in torch.sigmoid(logits)]

    @torch.no_grad()
    def embed(self, texts: list[str]) -> list[list[float]]:
        """One vector per text: mean pooling over non-pad tokens, or [CLS]."""
        if not texts:
            return []
        enc = self.tokenizer(texts, truncation=True, max_length=self.max_tokens,
                             padding=True, return_tensors="pt")
        out = self.encoder(**enc).last_hidden_state
        if self.pooling == "cls":
            pooled = out[:, 0, :]
        else:
            mask = enc["attention_mask"].unsqueeze(-1).to(out.dtype)
            pooled = (out * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)
        return [[float(v) for v in row] for row in pooled]

    def info(self) -> dict:
        return {
            "model_id": self.model_path,
            "dim": self.dim,
            "max_tokens": self.max_tokens,
            "pooling": self.pooling,
        }
