"""HTTP reward-scoring service for RL trainers.

Stateless request handling over a shared embedding cache: trainers retry
and shard batches arbitrarily, so no per-session state exists. Scoring is
synchronous because reward latency sits on the trainer's critical path.
"""

from __future__ import annotations

import logging
import threading
import time
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .embedder import Embedder, EmbedderConfig, as_embedder
from .errors import BackendUnavailableError, ParameterDomainError, RedtraceError
from .reward import PenaltyConfig, score_batch
from .segmenter import make_trace, normalize_answer
from .types import RedundancyReport, round6

logger = logging.getLogger("redtrace.service")

DEFAULT_MAX_BATCH_SIZE = 256


class ScoreItem(BaseModel):
    id: str
    text: str
    conclusion: Optional[str] = None
    ground_truth: str


class ScoreRequest(BaseModel):
    items: list[ScoreItem]
    config_override: Optional[dict] = None


def _result_entry(report: RedundancyReport) -> dict:
    return {
        "id": report.trace_id,
        "correct": report.correct,
        "ird": round6(report.ird),
        "erd": round6(report.erd),
        "p_int": round6(report.p_int),
        "p_ext": round6(report.p_ext),
        "reward": round6(report.reward),
        "fcs_sentence_index": report.segmentation.fcs_end_sentence,
    }


def create_app(
    penalty: PenaltyConfig = PenaltyConfig(),
    embedder: Embedder | EmbedderConfig | None = None,
    max_batch_size: int = DEFAULT_MAX_BATCH_SIZE,
    auth_token: Optional[str] = None,
) -> FastAPI:
    """Build the service app with its shared embedder and live config."""
    app = FastAPI(title="redtrace reward service")
    app.state.penalty = penalty
    app.state.embedder = as_embedder(embedder if embedder is not None else EmbedderConfig())
    app.state.max_batch_size = max_batch_size
    app.state.auth_token = auth_token
    app.state.config_lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": "malformed body"})

    def unauthorized(request: Request) -> Optional[JSONResponse]:
        token = app.state.auth_token
        if token and request.headers.get("x-auth-token") != token:
            return JSONResponse(status_code=401, content={"detail": "invalid token"})
        return None

    @app.post("/v1/score")
    def score(body: ScoreRequest, request: Request):
        denied = unauthorized(request)
        if denied:
            return denied
        started = time.perf_counter()
        if not body.items:
            return JSONResponse(status_code=400, content={"detail": "empty batch"})
        if len(body.items) > app.state.max_batch_size:
            return JSONResponse(
                status_code=413,
                content={
                    "detail": f"batch of {len(body.items)} exceeds limit "
                    f"{app.state.max_batch_size}"
                },
            )
        config: PenaltyConfig = app.state.penalty
        if body.config_override:
            try:
                config = config.merged(body.config_override)
            except ParameterDomainError as exc:
                return JSONResponse(status_code=400, content={"detail": str(exc)})

        errors: list[dict] = []
        scorable = []
        for item in body.items:
            try:
                trace = make_trace(
                    trace_id=item.id,
                    text=item.text,
                    ground_truth=None,
                    conclusion=item.conclusion,
                )
                scorable.append((trace, normalize_answer(item.ground_truth)))
            except RedtraceError as exc:
                errors.append({"id": item.id, "message": str(exc)})

        embedder: Embedder = app.state.embedder
        hits_before = embedder.cache_hits
        misses_before = embedder.cache_misses
        results: list[dict] = []
        if scorable:
            try:
                outcome = score_batch(scorable, config, embedder)
            except BackendUnavailableError as exc:
                return JSONResponse(status_code=502, content={"detail": str(exc)})
            for entry in outcome:
                if isinstance(entry, RedundancyReport):
                    results.append(_result_entry(entry))
                else:
                    errors.append({"id": entry.trace_id, "message": entry.message})

        elapsed_ms = (time.perf_counter() - started) * 1000.0
        hits = embedder.cache_hits - hits_before
        misses = embedder.cache_misses - misses_before
        lookups = hits + misses
        logger.info(
            "score batch_size=%d results=%d errors=%d cache_hit_rate=%.3f latency_ms=%.1f",
            len(body.items),
            len(results),
            len(errors),
            hits / lookups if lookups else 1.0,
            elapsed_ms,
        )
        return {"results": results, "errors": errors}

    @app.get("/v1/health")
    def health(request: Request):
        denied = unauthorized(request)
        if denied:
            return denied
        embedder: Embedder = app.state.embedder
        return {
            "status": "ok" if embedder.backend_healthy else "degraded",
            "backend": embedder.backend_id,
            "cache_entries": embedder.cache_entries(),
        }

    @app.get("/v1/config")
    def get_config(request: Request):
        denied = unauthorized(request)
        if denied:
            return denied
        return app.state.penalty.to_dict()

    @app.post("/v1/config")
    def set_config(overrides: dict, request: Request):
        denied = unauthorized(request)
        if denied:
            return denied
        with app.state.config_lock:
            try:
                updated = app.state.penalty.merged(overrides)
            except ParameterDomainError as exc:
                return JSONResponse(status_code=422, content={"detail": str(exc)})
            app.state.penalty = updated
        logger.info("config updated: %s", updated.to_dict())
        return updated.to_dict()

    return app
