"""Scorer backends: the deterministic offline stub and the HTTP client.

The stub makes the whole pipeline runnable and byte-reproducible with no
model server: relevance is the Jaccard token overlap between the query
segment and the rest of the input, plus a seeded sub-1e-6 jitter that breaks
ties deterministically. Embeddings are hashed bag-of-token vectors.

The remote backend talks JSON to a scorer service (POST /score, POST /embed).
Batches are retried with exponential backoff and may be issued concurrently
up to max_in_flight; responses are matched to requests by batch index, never
by arrival order.
"""

from __future__ import annotations

import hashlib
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import requests

from .errors import ProtocolError, ScorerUnavailableError, ValidationError
from .tokenization import tokenize

_JITTER_SCALE = 1e-6

RETRY_ATTEMPTS = 3
RETRY_BASE_DELAY = 0.25  # seconds, doubled per attempt


@dataclass(frozen=True)
class ScorerInput:
    """Ordered text segments; the scorer joins them with its separator token.

    The first segment is always the query; no segment may be empty.
    """

    segments: tuple[str, ...]

    def __post_init__(self):
        if len(self.segments) < 2:
            raise ValidationError("scorer input needs at least 2 segments")
        if any(not seg for seg in self.segments):
            raise ValidationError("scorer input segments must be non-empty")


@dataclass(frozen=True)
class ScorerHandle:
    """Backend selector: "stub:<seed>" or an http(s) endpoint."""

    backend: str = "stub:0"
    batch_size: int = 4
    max_in_flight: int = 4
    timeout: float = 30.0

    def is_stub(self) -> bool:
        return self.backend.startswith("stub:") or self.backend == "stub"

    def stub_seed(self) -> int:
        if self.backend == "stub":
            return 0
        try:
            return int(self.backend.split(":", 1)[1])
        except ValueError as exc:
            raise ValidationError(f"bad stub seed in {self.backend!r}") from exc


def _hash_unit(seed: int, payload: bytes) -> float:
    """Deterministic uniform value in [0, 1) from blake2b(seed || payload)."""
    digest = hashlib.blake2b(payload, digest_size=8,
                             key=seed.to_bytes(8, "little", signed=False)).digest()
    return int.from_bytes(digest, "little") / 2.0 ** 64


def stub_score(scorer_input: ScorerInput, seed: int = 0) -> float:
    """Jaccard overlap of query tokens vs the remaining segments, in [0, 1).

    The overlap is scaled by (1 - 1e-6) and a seeded jitter < 1e-6 is added,
    so identical token sets score >= 1 - 1e-6, disjoint sets score < 1e-6,
    and equal-overlap inputs are ordered deterministically.
    """
    query_tokens = set(tokenize(scorer_input.segments[0]))
    doc_tokens = set()
    for segment in scorer_input.segments[1:]:
        doc_tokens.update(tokenize(segment))
    union = query_tokens | doc_tokens
    jaccard = len(query_tokens & doc_tokens) / len(union) if union else 1.0
    payload = "\x00".join(scorer_input.segments).encode("utf-8")
    return jaccard * (1.0 - _JITTER_SCALE) + _hash_unit(seed, payload) * _JITTER_SCALE


def stub_embed(text: str, seed: int = 0, dim: int = 64) -> np.ndarray:
    """Hashed bag-of-tokens embedding; identical texts embed identically."""
    if dim < 1:
        raise ValidationError(f"embedding dim must be >= 1, got {dim}")
    vec = np.zeros(dim, dtype=np.float64)
    for token in tokenize(text):
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=9,
                                 key=seed.to_bytes(8, "little", signed=False)).digest()
        slot = int.from_bytes(digest[:8], "little") % dim
        sign = 1.0 if digest[8] & 1 else -1.0
        vec[slot] += sign
    if not vec.any():
        vec[0] = 1.0  # keep cosine defined for token-free text
    return vec


class ScorerClient:
    """Scoring and embedding against a ScorerHandle backend."""

    def __init__(self, handle: ScorerHandle):
        self.handle = handle

    def score_batch(self, inputs: Sequence[ScorerInput]) -> list[float]:
        """One finite score in [0, 1] per input, order-aligned."""
        if not inputs:
            return []
        if self.handle.is_stub():
            seed = self.handle.stub_seed()
            return [stub_score(item, seed) for item in inputs]
        return self._remote_batches(
            "/score",
            [{"items": [{"segments": list(item.segments)} for item in chunk]}
             for chunk in _chunks(inputs, self.handle.batch_size)],
            response_key="scores",
            expected_counts=[len(chunk) for chunk in _chunks(inputs, self.handle.batch_size)],
        )

    def embed_batch(self, texts: Sequence[str], dim: int = 64) -> list[np.ndarray]:
        if not texts:
            return []
        if self.handle.is_stub():
            seed = self.handle.stub_seed()
            return [stub_embed(text, seed, dim) for text in texts]
        flat = self._remote_batches(
            "/embed",
            [{"texts": list(chunk)} for chunk in _chunks(texts, self.handle.batch_size)],
            response_key="vectors",
            expected_counts=[len(chunk) for chunk in _chunks(texts, self.handle.batch_size)],
        )
        return [np.asarray(vec, dtype=np.float64) for vec in flat]

    def _remote_batches(self, endpoint: str, payloads: list[dict],
                        response_key: str, expected_counts: list[int]) -> list:
        url = self.handle.backend.rstrip("/") + endpoint
        results: list[list | None] = [None] * len(payloads)

        def post_one(batch_index: int) -> None:
            payload = payloads[batch_index]
            last_error: Exception | None = None
            for attempt in range(RETRY_ATTEMPTS):
                if attempt:
                    time.sleep(RETRY_BASE_DELAY * 2 ** (attempt - 1))
                try:
                    response = requests.post(url, json=payload, timeout=self.handle.timeout)
                except requests.RequestException as exc:
                    last_error = exc
                    continue
                if response.status_code >= 500:
                    last_error = ScorerUnavailableError(
                        f"{url} returned {response.status_code} for batch {batch_index}")
                    continue
                if response.status_code != 200:
                    raise ProtocolError(
                        f"{url} rejected batch {batch_index}: "
                        f"{response.status_code} {response.text[:200]}")
                try:
                    body = response.json()
                    values = body[response_key]
                except (ValueError, KeyError, TypeError) as exc:
                    raise ProtocolError(
                        f"malformed response from {url} for batch {batch_index}") from exc
                if len(values) != expected_counts[batch_index]:
                    raise ProtocolError(
                        f"{url} returned {len(values)} values for batch {batch_index}, "
                        f"expected {expected_counts[batch_index]}")
                results[batch_index] = values
                return
            raise ScorerUnavailableError(
                f"batch {batch_index} to {url} failed after {RETRY_ATTEMPTS} attempts: "
                f"{last_error}")

        max_workers = max(1, min(self.handle.max_in_flight, len(payloads)))
        if max_workers == 1:
            for i in range(len(payloads)):
                post_one(i)
        else:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                for future in [pool.submit(post_one, i) for i in range(len(payloads))]:
                    future.result()
        flat: list = []
        for chunk in results:
            flat.extend(chunk)  # type: ignore[arg-type]
        return flat


def _chunks(seq: Sequence, size: int) -> list[Sequence]:
    if size < 1:
        raise ValidationError(f"batch size must be >= 1, got {size}")
    return [seq[i:i + size] for i in range(0, len(seq), size)]


def score_batch(handle: ScorerHandle, inputs: Sequence[ScorerInput]) -> list[float]:
    """Module-level convenience over ScorerClient.score_batch."""
    return ScorerClient(handle).score_batch(inputs)
