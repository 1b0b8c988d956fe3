"""HTTP service exposing the chat pipeline and knowledge-base management.

All endpoints live under /v1 and speak JSON. Validation failures map to 400,
duplicate ingestion to 409, empty documents to 422, upstream fetch failures
to 502, generation backend failures to 503, and oversized payloads to 413.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .corpus import chunk_document, document_from_json, format_timestamp, parse_timestamp
from .engine import EngineState, answer_question, trace_to_json
from .errors import (
    BackendTimeout,
    BadTimestamp,
    DuplicateChunkId,
    EmptyDocument,
    FetchFailed,
    MalformedResponse,
    NonSuccessStatus,
)
from .gate import save_web_document
from .index import SimilarityMetric



class ChatOptions(BaseModel):
    k: Optional[int] = None
    j: Optional[int] = None
    use_kb: Optional[bool] = None
    use_web: Optional[bool] = None
    metric: Optional[str] = None
    max_tokens: Optional[int] = None


class ChatRequest(BaseModel):
    question: str = Field(min_length=1)
    question_date: Optional[str] = None
    options: Optional[ChatOptions] = None
    debug: bool = False


class SaveWebRequest(BaseModel):
    url: str = Field(min_length=1)


def create_app(state: EngineState, *, cors_origin: Optional[str] = None,
               max_request_bytes: int = 1_000_000) -> FastAPI:
    app = FastAPI(title="raggate", version=__version__)

    if cors_origin:
        from fastapi.middleware.cors import CORSMiddleware
        app.add_middleware(CORSMiddleware, allow_origins=[cors_origin],
                           allow_methods=["*"], allow_headers=["*"])

    @app.middleware("http")
    async def limit_body_size(request: Request, call_next):
        length = request.headers.get("content-length")
        if length and length.isdigit() and int(length) > max_request_bytes:
            return JSONResponse(status_code=413, content={"detail": "payload too large"})
        return await call_next(request)

    @app.exception_handler(RequestValidationError)
    async def validation_to_400(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.post("/v1/chat")
    def chat(body: ChatRequest):
        options = body.options or ChatOptions()
        try:
            question_date = parse_timestamp(body.question_date) if body.question_date else None
        except BadTimestamp as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        try:
            result = answer_question(
                state, body.question, question_date,
                k=options.k, j=options.j, use_kb=options.use_kb, use_web=options.use_web,
                metric=options.metric, max_tokens=options.max_tokens,
            )
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        except (BackendTimeout, NonSuccessStatus, MalformedResponse) as exc:
            return JSONResponse(status_code=503,
                                content={"detail": f"generation backend unavailable: {exc}"})
        payload = {
            "answer": result.answer,
            "citations": result.citations,
            "citations_text": result.citations_text,
            "retrieved": result.retrieved,
            "gate": trace_to_json(result.trace),
            "timings": result.timings,
            "question_date": format_timestamp(result.question_date),
            "language": result.language,
        }
        if body.debug:
            payload["debug"] = {"prompt": result.prompt_text}
        return payload

    @app.post("/v1/kb/documents")
    def ingest_document(body: dict):
        try:
            doc = document_from_json(body)
        except (KeyError, BadTimestamp, ValueError) as exc:
            return JSONResponse(status_code=400, content={"detail": f"invalid document: {exc}"})
        if not doc.summary.strip():
            return JSONResponse(status_code=422, content={"detail": "summary is empty"})
        if state.index.has_document(doc.id):
            return JSONResponse(status_code=409, content={"detail": f"document {doc.id!r} already present"})
        try:
            chunks = chunk_document(doc)
        except EmptyDocument as exc:
            return JSONResponse(status_code=422, content={"detail": str(exc)})
        try:
            state.index.add_chunks([(c, state.encoder.encode_key(c.text)) for c in chunks])
        except DuplicateChunkId as exc:
            return JSONResponse(status_code=409, content={"detail": str(exc)})
        return {"id": doc.id, "chunk_count": len(chunks)}

    @app.post("/v1/kb/save_web")
    def save_web(body: SaveWebRequest):
        if state.web_client is None:
            return JSONResponse(status_code=502, content={"detail": "no web client configured"})
        try:
            result = save_web_document(body.url, state.web_client, state.encoder, state.index)
        except FetchFailed as exc:
            return JSONResponse(status_code=502, content={"detail": str(exc)})
        except EmptyDocument as exc:
            return JSONResponse(status_code=422, content={"detail": str(exc)})
        return {"id": result.doc_id, "chunk_count": result.chunk_count,
                "already_present": result.already_present}

    @app.get("/v1/kb/search")
    def kb_search(q: str = Query(min_length=1), k: int = Query(default=5, ge=1),
                  metric: str = "cosine"):
        try:
            parsed_metric = SimilarityMetric.parse(metric)
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        hits = state.index.search(state.encoder.encode_query(q), k, parsed_metric)
        results = []
        for hit in hits:
            chunk = state.index.get_chunk(hit.chunk_id)
            results.append({
                "chunk_id": hit.chunk_id,
                "score": hit.score,
                "rank": hit.rank,
                "text": chunk.text,
                "published_at": format_timestamp(chunk.published_at),
            })
        return {"results": results}

    @app.get("/v1/config")
    def get_config():
        return {
            "gate": {
                "k": state.gate_config.k,
                "threshold": state.gate_config.threshold,
                "metric": state.gate_config.metric.value,
                "use_kb": state.gate_config.use_kb,
                "use_web": state.gate_config.use_web,
                "n_web": state.gate_config.n_web,
                "auto_update": state.gate_config.auto_update,
            },
            "prompt": {
                "j": state.prompt_config.j,
                "template_language": state.prompt_config.template_language,
            },
            "index_size": len(state.index),
            "index_documents": state.index.n_documents,
            "encoder": {
                "dim": state.encoder.dim,
                "n_features": state.encoder.n_features,
                "seed": state.encoder.seed,
            },
            "version": __version__,
        }

    @app.get("/v1/health")
    def health():
        return {"status": "ok"}

    return app
