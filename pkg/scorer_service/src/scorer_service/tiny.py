"""Self-contained miniature model bundle for offline use.

Builds a randomly initialized BERT-compatible checkpoint with a generated
WordPiece vocabulary: single characters (plus their ## continuations) give
full coverage of ASCII text, and a list of common words keeps statement
tokens intact. Hidden size matches the 768 of the full-size base models so
clients exercise the real wire contract; the layer count is tiny so CPU
inference and smoke training stay fast.
"""

from __future__ import annotations

import string
from pathlib import Path

import torch
from transformers import (BertConfig, BertForSequenceClassification, BertModel,
                          BertTokenizer)

COMMON_WORDS = [
    "credibility", "score", "of", "the", "document", "is", "topicality",
    "a", "an", "and", "to", "in", "for", "with", "that", "this", "are",
    "vaccine", "flu", "influenza", "vaccination", "shots", "virus", "health",
    "study", "trial", "evidence", "clinical", "randomized", "controlled",
    "treatment", "cure", "miracle", "doctors", "patients", "disease",
    "blood", "pressure", "diet", "cold", "honey", "garlic", "tea", "market",
    "stock", "money", "news", "best", "does", "have", "positive", "bcg",
]


def build_vocab() -> list[str]:
    chars = list(string.ascii_lowercase + string.digits) + [".", "-", ","]
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    vocab.extend(chars)
    vocab.extend("##" + c for c in chars)
    vocab.extend(w for w in COMMON_WORDS if w not in vocab)
    return vocab


def create_tiny_bundle(out_dir: str | Path, seed: int = 0,
                       hidden_size: int = 768, num_layers: int = 2,
                       num_heads: int = 4, intermediate_size: int = 256) -> Path:
    """Write a loadable checkpoint directory and return its path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    vocab = build_vocab()
    vocab_file = out_dir / "vocab.txt"
    vocab_file.write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = BertTokenizer(str(vocab_file), do_lower_case=True,
                              model_max_length=512)
    tokenizer.save_pretrained(out_dir)

    torch.manual_seed(seed)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=hidden_size,
        num_hidden_layers=num_layers,
        num_attention_heads=num_heads,
        intermediate_size=intermediate_size,
        max_position_embeddings=512,
    )
    BertModel(config).save_pretrained(out_dir)
    # reuse the encoder weights under a classification head so both load
    # paths point at one directory
    head = BertForSequenceClassification.from_pretrained(out_dir, num_labels=1)
    head.save_pretrained(out_dir)
    return out_dir
