"""Offline cross-encoder fine-tuning on binary relevance labels.

Training pairs arrive as JSONL records {"query": ..., "text": ..., "label": 0|1}
where text is the document or its statement-enhanced version; the script is
agnostic to the variant because enhancement happens upstream. Queries are
split 80/20 into train and dev sets at the query level (no query appears on
both sides), the model trains with Adam, and the checkpoint with the best dev
loss is saved.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path

import torch
from torch.utils.data import DataLoader, Dataset
from transformers import BertForSequenceClassification, BertTokenizer

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    epochs: int = 10
    batch_size: int = 4
    learning_rate: float = 2e-5
    max_tokens: int = 512
    dev_fraction: float = 0.2
    seed: int = 0


@dataclass
class TrainPair:
    query: str
    text: str
    label: int


def load_pairs(path: str | Path) -> list[TrainPair]:
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            label = int(record["label"])
            if label not in (0, 1):
                raise ValueError(f"line {lineno}: label {label} outside {{0, 1}}")
            pairs.append(TrainPair(record["query"], record["text"], label))
    return pairs


def split_by_query(pairs: list[TrainPair], dev_fraction: float,
                   seed: int) -> tuple[list[TrainPair], list[TrainPair]]:
    """Query-level split: every pair of a query lands on the same side."""
    queries = sorted({p.query for p in pairs})
    rng = random.Random(seed)
    rng.shuffle(queries)
    n_dev = max(1, round(len(queries) * dev_fraction))
    dev_queries = set(queries[:n_dev])
    train = [p for p in pairs if p.query not in dev_queries]
    dev = [p for p in pairs if p.query in dev_queries]
    if not train:
        raise ValueError("query split left the training side empty")
    return train, dev


class _PairDataset(Dataset):
    def __init__(self, pairs: list[TrainPair]):
        self.pairs = pairs

    def __len__(self):
        return len(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]


def _collate(tokenizer: BertTokenizer, max_tokens: int):
    def collate(batch: list[TrainPair]):
        enc = tokenizer([p.query for p in batch], [p.text for p in batch],
                        truncation="only_second", max_length=max_tokens,
                        padding=True, return_tensors="pt")
        labels = torch.tensor([float(p.label) for p in batch])
        return enc, labels
    return collate


def finetune(pairs_path: str | Path, model_path: str | Path,
             out_dir: str | Path, config: TrainConfig = TrainConfig()) -> Path:
    """Train and save the best-dev checkpoint; returns the checkpoint dir."""
    pairs = load_pairs(pairs_path)
    if not pairs:
        raise ValueError(f"no training pairs in {pairs_path}")
    train_pairs, dev_pairs = split_by_query(pairs, config.dev_fraction, config.seed)
    logger.info("loaded %d pairs: %d train / %d dev (query-level split)",
                len(pairs), len(train_pairs), len(dev_pairs))

    torch.manual_seed(config.seed)
    tokenizer = BertTokenizer.from_pretrained(model_path)
    model = BertForSequenceClassification.from_pretrained(
        str(model_path), num_labels=1)
    collate = _collate(tokenizer, config.max_tokens)
    train_loader = DataLoader(_PairDataset(train_pairs), batch_size=config.batch_size,
                              shuffle=True, collate_fn=collate,
                              generator=torch.Generator().manual_seed(config.seed))
    dev_loader = DataLoader(_PairDataset(dev_pairs), batch_size=config.batch_size,
                            shuffle=False, collate_fn=collate)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    loss_fn = torch.nn.BCEWithLogitsLoss()

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    best_dev = float("inf")
    for epoch in range(1, config.epochs + 1):
        model.train()
        train_loss = 0.0
        for enc, labels in train_loader:
            optimizer.zero_grad()
            logits = model(**enc).logits.squeeze(-1)
            loss = loss_fn(logits, labels)
            loss.backward()
            optimizer.step()
            train_loss += float(loss.detach()) * len(labels)
        train_loss /= len(train_pairs)

        model.eval()
        dev_loss = 0.0
        with torch.no_grad():
            for enc, labels in dev_loader:
                logits = model(**enc).logits.squeeze(-1)
                dev_loss += float(loss_fn(logits, labels)) * len(labels)
        dev_loss /= max(len(dev_pairs), 1)

        logger.info("epoch %d/%d: train_loss=%.4f dev_loss=%.4f",
                    epoch, config.epochs, train_loss, dev_loss)
        if dev_loss < best_dev:
            best_dev = dev_loss
            model.save_pretrained(out_dir)
            tokenizer.save_pretrained(out_dir)
            logger.info("epoch %d: new best dev loss, checkpoint saved", epoch)
    return out_dir
