"""HTTP/JSON inference endpoints: /embed, /score, /info, /debug/tokenize.

Request handling is stateless and deterministic in inference mode; requests
are independent, so one serialized model instance and a replicated pool
behave identically from the client's point of view.

Configuration comes from arguments or the environment:
    SCORER_MODEL     checkpoint directory or model id (required)
    SCORER_POOLING   mean | cls (default mean)
    SCORER_MAX_BATCH maximum items per request (default 256)
"""

from __future__ import annotations

import os
from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .bundle import InputTooLongError, ModelBundle

DEFAULT_MAX_BATCH = 256


class EmbedRequest(BaseModel):
    texts: list[str]


class EmbedResponse(BaseModel):
    vectors: list[list[float]]
    dim: int


class ScoreItem(BaseModel):
    segments: list[str]


class ScoreRequest(BaseModel):
    items: list[ScoreItem]


class ScoreResponse(BaseModel):
    scores: list[float]


class TokenizeRequest(BaseModel):
    segments: list[str]


class TokenizeResponse(BaseModel):
    tokens: list[str]
    input_ids: list[int]
    token_type_ids: list[int]
    truncated: bool


def create_app(model_path: str | None = None, pooling: str | None = None,
               max_batch: int | None = None) -> FastAPI:
    model_path = model_path or os.environ.get("SCORER_MODEL")
    pooling = pooling or os.environ.get("SCORER_POOLING", "mean")
    max_batch = max_batch or int(os.environ.get("SCORER_MAX_BATCH",
                                                DEFAULT_MAX_BATCH))
    state: dict[str, ModelBundle | None] = {"bundle": None}

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        if model_path is None:
            raise RuntimeError("no model configured; set SCORER_MODEL")
        state["bundle"] = ModelBundle(model_path, pooling=pooling)
        yield
        state["bundle"] = None

    app = FastAPI(title="scorer-service", lifespan=lifespan)

    def bundle() -> ModelBundle:
        loaded = state["bundle"]
        if loaded is None:
            raise HTTPException(status_code=503, detail="model loading")
        return loaded

    @app.get("/info")
    def info() -> dict:
        return bundle().info()

    @app.post("/embed", response_model=EmbedResponse)
    def embed(request: EmbedRequest) -> EmbedResponse:
        if not request.texts:
            raise HTTPException(status_code=400, detail="texts must be non-empty")
        if len(request.texts) > max_batch:
            raise HTTPException(status_code=413,
                                detail=f"batch exceeds limit {max_batch}")
        if any(not t for t in request.texts):
            raise HTTPException(status_code=400, detail="empty text in batch")
        model = bundle()
        return EmbedResponse(vectors=model.embed(request.texts), dim=model.dim)

    @app.post("/score", response_model=ScoreResponse)
    def score(request: ScoreRequest) -> ScoreResponse:
        if len(request.items) > max_batch:
            raise HTTPException(status_code=413,
                                detail=f"batch exceeds limit {max_batch}")
        for i, item in enumerate(request.items):
            if len(item.segments) < 2:
                raise HTTPException(
                    status_code=422,
                    detail=f"item {i} has {len(item.segments)} segments, need >= 2")
            if any(not seg for seg in item.segments):
                raise HTTPException(status_code=400,
                                    detail=f"item {i} contains an empty segment")
        try:
            scores = bundle().score([item.segments for item in request.items])
        except InputTooLongError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return ScoreResponse(scores=scores)

    @app.post("/debug/tokenize", response_model=TokenizeResponse)
    def debug_tokenize(request: TokenizeRequest) -> TokenizeResponse:
        if len(request.segments) < 2:
            raise HTTPException(status_code=422, detail="need >= 2 segments")
        try:
            encoded = bundle().encode_segments(request.segments)
        except InputTooLongError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return TokenizeResponse(tokens=encoded.tokens,
                                input_ids=encoded.input_ids,
                                token_type_ids=encoded.token_type_ids,
                                truncated=encoded.truncated)

    return app
