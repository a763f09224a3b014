"""Batch HTTP scoring service.

Endpoints:
  POST /v1/score   batch of documents -> reward tensors (order preserved,
                   per-document failures isolated as error objects)
  POST /v1/motifs  batch of documents -> motif vectors + distinctive share
  GET  /healthz    version, mode, and artifact fingerprints

All shared state is immutable after startup; the evaluator client's in-flight
cap is the only throttle.
"""

from __future__ import annotations

from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from . import __version__
from .config import Settings
from .documents import document_from_record
from .errors import EngineError
from .motifs import OOV_KEY, build_hypergraph, enumerate_motifs
from .distinctive import aggregate
from .rewards import MODE_BLENDED, MODE_SURFACE, RewardEngine, RewardRequest
from .segmentation import token_sequence_from_offsets


class ScoreDocument(BaseModel):
    model_config = ConfigDict(extra="ignore")

    doc_id: str
    text: str
    tokens: list[list[int]] | None = None
    segments: list[dict] | None = None
    author_label: str | None = None
    desired_length: int | None = None
    instruction: str | None = None


class ScoreRequestBody(BaseModel):
    model_config = ConfigDict(extra="ignore")

    documents: list[ScoreDocument]
    mode: str | None = None
    desired_length: int | None = None


class MotifsRequestBody(BaseModel):
    model_config = ConfigDict(extra="ignore")

    documents: list[ScoreDocument]


def _document_of(entry: ScoreDocument):
    """Build a DiscourseDocument from an inline request entry, if it carries a parse."""
    if entry.segments is None:
        return None
    record = {
        "doc_id": entry.doc_id,
        "text": entry.text,
        "author_label": entry.author_label,
        "tokens": entry.tokens,
        "segments": entry.segments,
    }
    return document_from_record(record, token_band=None)


def _error_payload(exc: Exception) -> dict:
    return {"type": type(exc).__name__, "message": str(exc)}


def create_app(engine: RewardEngine, settings: Settings) -> FastAPI:
    app = FastAPI(title="discourse-reward scoring service", version=__version__)

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/healthz")
    def healthz() -> dict:
        return {
            "status": "ok",
            "version": __version__,
            "mode": settings.mode,
            "motif_fingerprint": (
                engine.motif_set.fingerprint if engine.motif_set is not None else None
            ),
            "model_fingerprint": (
                engine.model.vocab_fingerprint if engine.model is not None else None
            ),
            "k": settings.k,
        }

    @app.post("/v1/score")
    def score_batch(body: ScoreRequestBody) -> JSONResponse:
        if not body.documents:
            return JSONResponse(status_code=400, content={"detail": "empty documents array"})
        mode = body.mode or settings.mode
        if mode in (MODE_SURFACE, MODE_BLENDED) and engine.evaluator_client is None:
            return JSONResponse(
                status_code=503,
                content={"detail": "surface scoring requested but no evaluator endpoint configured"},
            )
        results = [score_one_document(engine, settings, entry, mode, body.desired_length) for entry in body.documents]
        return JSONResponse(content={"results": results})

    @app.post("/v1/motifs")
    def motif_batch(body: MotifsRequestBody) -> JSONResponse:
        if not body.documents:
            return JSONResponse(status_code=400, content={"detail": "empty documents array"})
        if engine.motif_set is None:
            return JSONResponse(status_code=503, content={"detail": "no motif set loaded"})
        results = []
        for entry in body.documents:
            try:
                doc = _document_of(entry)
                if doc is None:
                    raise EngineError("document carries no parse ('segments' missing)")
                counts = [
                    enumerate_motifs(build_hypergraph(seg.tree), engine.motif_set.k)
                    for seg in doc.segments
                ]
                vector = aggregate(counts, engine.motif_set)
                keys = list(engine.motif_set.vocabulary) + [OOV_KEY]
                weights = {
                    key: float(v) for key, v in zip(keys, vector.values) if v != 0.0
                }
                distinctive_share = float(
                    sum(
                        v
                        for key, v in zip(keys, vector.values)
                        if key in engine.motif_set.distinctive
                    )
                )
                results.append(
                    {
                        "doc_id": entry.doc_id,
                        "motifs": weights,
                        "distinctive_share": distinctive_share,
                    }
                )
            except Exception as exc:  # noqa: BLE001 - per-document isolation
                results.append({"doc_id": entry.doc_id, "error": _error_payload(exc)})
        return JSONResponse(content={"results": results})

    return app


def score_one_document(
    engine: RewardEngine,
    settings: Settings,
    entry: ScoreDocument,
    mode: str,
    batch_desired_length: int | None,
) -> dict[str, Any]:
    try:
        document = _document_of(entry)
        tokens = None
        if entry.tokens is not None and document is None:
            tokens = token_sequence_from_offsets(entry.text, entry.tokens)
        desired = (
            entry.desired_length
            if entry.desired_length is not None
            else (batch_desired_length if batch_desired_length is not None else settings.desired_length)
        )
        request = RewardRequest(
            text=entry.text,
            desired_length=desired,
            mode=mode,
            doc_id=entry.doc_id,
            instruction=entry.instruction,
            tokens=tokens,
            document=document,
        )
        tensor, diagnostics = engine.compute_rewards(request)
        return {
            "doc_id": entry.doc_id,
            "episodic": tensor.episodic,
            "episodic_index": tensor.episodic_index,
            "n_tokens": tensor.n,
            "dense": [{"index": i, "value": v} for i, v in tensor.dense],
            "diagnostics": diagnostics,
        }
    except Exception as exc:  # noqa: BLE001 - per-document isolation
        return {"doc_id": entry.doc_id, "error": _error_payload(exc)}


def run_server(engine: RewardEngine, settings: Settings) -> None:
    import uvicorn

    app = create_app(engine, settings)
    uvicorn.run(app, host=settings.host, port=settings.port, log_level="warning")
